use clap::Parser;

fn main() {
    let cli = slaiot_cli::Cli::parse();
    let status = slaiot_cli::run(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(status.code());
}
