use betaseq::cli;
use std::io::Write;

fn main() {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    if let Err(e) = cli::configure_threads() {
        let v = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": 1 });
        let _ = writeln!(err, "{v}");
        std::process::exit(1);
    }
    let code = cli::main_with(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    std::process::exit(code);
}
