fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init().ok();
    let code = scc_cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
