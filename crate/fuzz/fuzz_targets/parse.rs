#![no_main]

use libfuzzer_sys::fuzz_target;
use qparallel::parser::{parse, pretty_print};

// Anything that parses must survive a print/parse roundtrip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(ast) = parse(src) {
        let printed = pretty_print(&ast);
        let again = parse(&printed).expect("printed program must reparse");
        assert_eq!(again, ast);
        assert_eq!(pretty_print(&again), printed);
    }
});
