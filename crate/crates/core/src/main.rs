use clap::error::ErrorKind;
use clap::Parser;
use nilcircle::runner::{error_record, main_with, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let err = nilcircle::Error::Parse(e.to_string().trim().to_string());
            eprintln!("{}", error_record(&err));
            std::process::exit(err.exit_code());
        }
    };
    std::process::exit(main_with(cli));
}
