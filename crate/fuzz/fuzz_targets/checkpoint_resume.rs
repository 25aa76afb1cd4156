#![no_main]

use libfuzzer_sys::fuzz_target;
use primewalk::checkpoint;

// A loaded checkpoint must be safe to continue from.
fuzz_target!(|data: &[u8]| {
    if let Ok(mut w) = checkpoint::load(data) {
        let n = w.n();
        if n > 1 << 20 {
            return;
        }
        let total = w.grid().total();
        w.run_to(n + 64, 16).expect("resume from a valid checkpoint");
        assert_eq!(w.grid().total(), total + 64);
    }
});
