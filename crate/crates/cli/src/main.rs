use clap::Parser;

fn main() {
    let cli = match polopt_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { polopt_cli::EXIT_INPUT } else { polopt_cli::EXIT_OK });
        }
    };
    std::process::exit(polopt_cli::run(&cli));
}
