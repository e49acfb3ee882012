fn main() {
    // CSV output is routinely piped into `head`-style consumers; dying on a
    // closed pipe is the expected behavior, not a panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(rabiest::cli::main_entry());
}
