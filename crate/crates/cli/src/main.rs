use clap::Parser;
use swapsim::{run, Args};

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => println!("{}", report.display()),
        Err(e) => {
            eprintln!("swapsim: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
