use clap::Parser;

fn main() {
    let cli = nide_cli::Cli::parse();
    let code = nide_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
