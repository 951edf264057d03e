// Drives the command-line harness in-process and prints its CSV with the
// manifest header.

pub fn run_example() -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = ["addwalk", "localtime", "--p", "2", "--n", "50", "--replicas", "4", "--seed", "9"];
    let code = addwalk::cli::run_with(argv, &mut out, &mut err);
    if code != 0 {
        return Err(String::from_utf8_lossy(&err).into_owned());
    }
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    print!("{text}");
    Ok(text)
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
