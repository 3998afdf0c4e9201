//! Worker-pool setup: `RIPKIT_THREADS` caps the rayon pool, defaulting to
//! the available parallelism.

use std::sync::Once;

static INIT: Once = Once::new();

pub fn init_thread_pool() {
    INIT.call_once(|| {
        if let Some(threads) = std::env::var("RIPKIT_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&t| t > 0)
        {
            // Fails harmlessly if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    });
}
