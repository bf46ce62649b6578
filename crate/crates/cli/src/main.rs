use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let env_seed = std::env::var(genesift_cli::SEED_ENV).ok();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = genesift_cli::run(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    let _ = io::stdout().flush();
    ExitCode::from(code as u8)
}
