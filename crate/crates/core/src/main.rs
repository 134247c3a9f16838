use std::io::{self, Read};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = position_auction::cli::run_cli(
        &args,
        || {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map(|_| s)
        },
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    std::process::exit(code);
}
