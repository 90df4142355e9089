use std::io;

fn main() {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = omega_lab::cli::run(
        std::env::args_os().collect(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    std::process::exit(code);
}
