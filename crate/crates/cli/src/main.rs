mod args;
mod commands;

use args::ParsedArgs;

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&argv));
}

fn run(argv: &[String]) -> i32 {
    let args = match ParsedArgs::parse(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let threads = match args.get("threads") {
        None => None,
        Some(s) => match s.parse::<usize>() {
            Ok(t) if t >= 1 => Some(t),
            _ => {
                eprintln!("error: --threads expects a positive integer, got '{s}'");
                return 1;
            }
        },
    };
    let outcome = match threads {
        Some(t) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot build a {t}-thread pool: {e}");
                    return 2;
                }
            };
            pool.install(|| commands::dispatch(&args))
        }
        None => commands::dispatch(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
