use clap::Parser;

use hdrelay::cli::{run, Cli};

fn main() {
    if let Ok(threads) = std::env::var("HDRELAY_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    run(Cli::parse());
}
