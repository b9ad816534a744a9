// Parse a unified diff and look at its line partitions.
//
// `cargo run --example parse_diff`

use stale_todo::diff::{line_scopes, normalize_diff, normalize_message, parse_unified_diff};

const DIFF: &str = "\
diff --git a/net/client.py b/net/client.py
--- a/net/client.py
+++ b/net/client.py
@@ -10,3 +10,6 @@ def fetch(url):
     session = Session()
-    # TODO: retry on timeout
-    return session.get(url)
+    for _ in range(3):
+        try:
+            return session.get(url, timeout=5)
+        except Timeout:
+            pass
";

pub fn run_example() -> stale_todo::Result<String> {
    let doc = parse_unified_diff(DIFF)?;
    let doc = normalize_diff(doc).expect("small diff");
    let mut out = String::new();
    for line in &doc.lines {
        let num = |n: Option<usize>| n.map_or("-".to_string(), |n| n.to_string());
        out.push_str(&format!(
            "{:>3} {:>3}  {}{}\n",
            num(line.old_line),
            num(line.new_line),
            line.kind.marker(),
            line.text
        ));
    }
    let (added, removed, equal) = line_scopes(&doc);
    out.push_str(&format!(
        "added {}, removed {}, unchanged {}\n",
        added.len(),
        removed.len(),
        equal.len()
    ));
    let msg = normalize_message("Retry fetches on timeout (#412), reverts 9fceb02d");
    out.push_str(&format!("message: {}\n", msg.as_str()));
    Ok(out)
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
