use clap::Parser;
use spsp_cli::{dispatch, init_threads, Cli};

fn main() {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| dispatch(cli));
    match result {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
