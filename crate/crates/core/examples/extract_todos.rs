// Pull TODO comments out of diffs, check that they sit next to a change,
// and carve the code change that accompanies them.
//
// `cargo run --example extract_todos`

use stale_todo::corpus::sample_from_commit;
use stale_todo::diff::{normalize_diff, parse_unified_diff, RawCommit};
use stale_todo::todo::{associate, carve_code_change, extract_comments, find_todos, Language};

const JAVA_DIFF: &str = "\
--- a/src/Cache.java
+++ b/src/Cache.java
@@ -4,6 +4,6 @@ class Cache {
     private final Map<String, byte[]> entries = new HashMap<>();
     /* TODO: bound the cache size */
     byte[] get(String key) {
-        return entries.get(key);
+        return entries.getOrDefault(key, EMPTY);
     }
     String name = \"// TODO inside a string\";
";

pub fn run_example() -> stale_todo::Result<String> {
    let mut out = String::new();
    let doc = normalize_diff(parse_unified_diff(JAVA_DIFF)?).expect("small diff");
    let comments = extract_comments(&doc, Language::Java);
    out.push_str(&format!("{} comment(s)\n", comments.len()));
    let todos = find_todos(&comments, Language::Java);
    for todo in &todos {
        out.push_str(&format!(
            "{:?} line: \"{}\", associated: {}\n",
            todo.kind(),
            todo.text,
            associate(todo, &doc, 3)
        ));
        out.push_str(&format!(
            "code change:\n{}\n",
            carve_code_change(&doc, todo).rendered
        ));
    }

    let commit = RawCommit {
        repo: "demo".into(),
        commit_id: "0001".into(),
        message: "Return EMPTY for unknown keys".into(),
        diff_text: JAVA_DIFF.into(),
    };
    match sample_from_commit(&commit, Language::Java, 3) {
        Ok(s) => out.push_str(&format!("sample label: {:?}\n", s.label)),
        Err(reason) => out.push_str(&format!("dropped: {}\n", reason.name())),
    }
    Ok(out)
}

fn main() -> stale_todo::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
