//! The `compare` subcommand in-process: contour, rational and Monte Carlo on
//! the default grid.

fn main() {
    let args = ["walkfluct", "compare", "--model", "markov", "--grid", "default", "--paths", "50000"];
    let code = walkfluct::cli::run_with_io(args, &mut std::io::stdout(), &mut std::io::stderr());
    println!("exit code {code}");
}
