use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let describe = Command::new("git")
        .args(["describe", "--always", "--tags", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok());
    if let Some(d) = describe {
        println!(
            "cargo:rustc-env=CGMOS_GIT_DESCRIBE={}+{}",
            env!("CARGO_PKG_VERSION"),
            d.trim()
        );
    }
}
