#![no_main]

use libfuzzer_sys::fuzz_target;
use redistnet::instance::{format_instance, parse_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((net, profile)) = parse_instance(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = parse_instance(&format_instance(&net, &profile)).expect("formatted instance parses");
        assert_eq!(again, (net, profile));
    }
});
