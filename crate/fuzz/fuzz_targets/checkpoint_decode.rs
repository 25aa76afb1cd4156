#![no_main]

use libfuzzer_sys::fuzz_target;
use primewalk::checkpoint;

fuzz_target!(|data: &[u8]| {
    if let Ok(w) = checkpoint::load(data) {
        // Anything accepted must re-encode to the same bytes.
        assert_eq!(checkpoint::save(&w), data);
    }
});
