#![no_main]

use libfuzzer_sys::fuzz_target;
use primewalk::export;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = export::read_snapshots(data) {
        let mut buf = Vec::new();
        export::write_snapshots(&mut buf, &rows).unwrap();
        let again = export::read_snapshots(&buf[..]).expect("re-read written table");
        assert_eq!(again, rows);
    }
});
