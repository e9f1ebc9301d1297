use clap::Parser;
use svine_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("SVINE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Results do not depend on the thread count; this only bounds CPU use.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = execute(cli, &mut stdout) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
