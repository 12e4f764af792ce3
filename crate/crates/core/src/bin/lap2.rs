use std::io::Write;

fn main() {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let code = lap2::cli::run(std::env::args_os(), &mut out, &mut err, lap2::cli::color_enabled());
    let _ = out.flush();
    std::process::exit(code);
}
