use clap::Parser;

fn main() {
    let cli = cts_cli::Cli::parse();
    let outcome = cts_cli::execute(&cli);
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports are plain JSON");
    if let Some(err) = outcome.report.get("error") {
        eprintln!("cts: {}", err["message"].as_str().unwrap_or("error"));
    }
    println!("{text}");
    if let Some(path) = &outcome.write_to {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("cts: cannot write {}: {e}", path.display());
            std::process::exit(cts_cli::EXIT_INPUT);
        }
    }
    std::process::exit(outcome.exit_code);
}
