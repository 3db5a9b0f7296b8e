use clap::Parser;

use hpwl::cli::{diagnose, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {}", diagnose(&e));
            std::process::exit(2);
        }
    }
}
