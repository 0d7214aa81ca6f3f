use clap::Parser;
use spectraldiff::cli::{init_thread_pool, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_thread_pool().and_then(|_| run(&cli));
    match result {
        Ok(m) => {
            for f in &m.outputs {
                println!("{}", f.path);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
