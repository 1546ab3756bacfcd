use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match plasmon_shift_cli::run(std::env::args_os()) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for l in &report.lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let plasmon_shift_cli::CliError::Usage(msg) = &e {
                eprintln!("{msg}");
            }
            eprintln!("{}", e.summary());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
