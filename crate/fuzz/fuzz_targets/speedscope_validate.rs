#![no_main]

use libfuzzer_sys::fuzz_target;
use qparallel::flamegraph::validate_speedscope;

fuzz_target!(|data: &[u8]| {
    if let Ok(json) = std::str::from_utf8(data) {
        let _ = validate_speedscope(json);
    }
});
