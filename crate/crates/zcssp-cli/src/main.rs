/// Restores the default SIGPIPE disposition so that piping output into a
/// consumer that exits early (`zcssp table ... | head`) terminates the
/// process quietly, as Unix filters do, instead of panicking on a failed
/// write to stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    std::process::exit(zcssp_cli::cli_main(std::env::args_os()));
}
