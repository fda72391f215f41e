#![no_main]

use libfuzzer_sys::fuzz_target;
use qparallel::ir::GateClass;
use qparallel::scheduler::MetricTable;

// An accepted config, written back out in canonical form, must load to the
// same table.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = MetricTable::preset(text);
    if let Ok(table) = MetricTable::from_config(text) {
        let canonical: String = GateClass::ALL
            .iter()
            .map(|c| format!("{} = {}\n", c.name(), table.cost(*c)))
            .collect();
        assert_eq!(MetricTable::from_config(&canonical).unwrap(), table);
    }
});
