fn main() {
    eprintln!("inls-lab: command-line front end not wired up yet");
    std::process::exit(1);
}
