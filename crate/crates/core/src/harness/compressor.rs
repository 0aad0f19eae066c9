use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Placeholder replaced by a temporary file path holding the input.
pub const FILE_PLACEHOLDER: &str = "{}";

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Runs `command` through `sh -c` and returns the number of bytes it writes
/// to standard output.
///
/// The input goes to the command's standard input, unless the command
/// contains `{}`, in which case the input is written to a temporary file
/// whose path replaces every `{}`.
pub fn measure_compressed_size(command: &str, data: &[u8]) -> Result<u64> {
    if command.trim().is_empty() {
        return Err(Error::Compressor("empty compressor command".into()));
    }
    if command.contains(FILE_PLACEHOLDER) {
        let path = std::env::temp_dir().join(format!(
            "entrotest-{}-{}.bin",
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&path, data)?;
        let expanded = command.replace(FILE_PLACEHOLDER, &path.to_string_lossy());
        let result = run(&expanded, None);
        let _ = std::fs::remove_file(&path);
        result
    } else {
        run(command, Some(data))
    }
}

fn run(command: &str, stdin_data: Option<&[u8]>) -> Result<u64> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(if stdin_data.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Compressor(format!("cannot start `{command}`: {e}")))?;

    let mut stdout = child.stdout.take().expect("stdout is piped");
    let size = std::thread::scope(|scope| -> Result<u64> {
        if let (Some(data), Some(mut stdin)) = (stdin_data, child.stdin.take()) {
            // A compressor may exit before reading everything; a broken pipe
            // then surfaces through its exit status.
            scope.spawn(move || {
                let _ = stdin.write_all(data);
            });
        }
        let mut buf = [0u8; 1 << 16];
        let mut total = 0u64;
        loop {
            let n = stdout.read(&mut buf)?;
            if n == 0 {
                break;
            }
            total += n as u64;
        }
        Ok(total)
    })?;
    let status = child.wait()?;
    if !status.success() {
        return Err(Error::Compressor(format!(
            "`{command}` exited with {status}"
        )));
    }
    Ok(size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_preserves_size() {
        let data = vec![7u8; 100_000];
        assert_eq!(measure_compressed_size("cat", &data).unwrap(), 100_000);
    }

    #[test]
    fn placeholder_reads_file() {
        let data = b"hello world".to_vec();
        assert_eq!(measure_compressed_size("cat {}", &data).unwrap(), 11);
    }

    #[test]
    fn failing_command() {
        assert!(matches!(
            measure_compressed_size("exit 3", b"x"),
            Err(Error::Compressor(_))
        ));
        assert!(measure_compressed_size("  ", b"x").is_err());
    }

    #[test]
    fn compressible_input_shrinks() {
        // `gzip` is part of any POSIX base image; skip quietly if absent.
        let has_gzip = Command::new("sh")
            .args(["-c", "command -v gzip"])
            .output()
            .is_ok_and(|o| o.status.success());
        if !has_gzip {
            return;
        }
        let data = vec![0u8; 50_000];
        assert!(measure_compressed_size("gzip -c", &data).unwrap() < 1000);
    }
}
