#![no_main]

use libfuzzer_sys::fuzz_target;
use uwoc::sweep::SweepRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = SweepRecord::parse_csv_row(line) {
        // Writing rounds to six digits once; after that the text is stable.
        let row = record.csv_row();
        let again = SweepRecord::parse_csv_row(&row).expect("own output parses");
        assert_eq!(again.csv_row(), row);
    }
});
