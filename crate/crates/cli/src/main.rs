use clap::Parser;

fn main() {
    let cli = match wpa_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = wpa_cli::CliError::Config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    std::process::exit(wpa_cli::run(cli));
}
