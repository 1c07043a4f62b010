fn main() {
    std::process::exit(ncq::jobs::run(std::env::args_os()));
}
