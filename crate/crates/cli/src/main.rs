use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = cbctt_cli::Cli::parse();
    let code = match cbctt_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            cbctt_cli::EXIT_ERROR
        }
    };
    std::process::exit(code);
}
