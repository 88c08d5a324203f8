#![no_main]

use libfuzzer_sys::fuzz_target;
use redistnet::Money;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = s.parse::<Money>() {
            assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }
    }
});
