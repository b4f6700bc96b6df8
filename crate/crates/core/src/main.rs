use clap::Parser;
use gausshf::cli::{run_command, Args, EXIT_CONVERGED, EXIT_VALIDATION};

fn main() {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            // usage errors count as invalid input; help and version are not errors
            std::process::exit(if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_CONVERGED
            });
        }
    };
    std::process::exit(run_command(&args, &mut std::io::stderr()));
}
