//! YAML subset parsing and canonical serialization.
//!
//! The subset covers what Ansible content actually uses: block and flow
//! collections, plain/quoted scalars, literal and folded block scalars,
//! comments, and `---`/`...` markers. Anchors, aliases, tags and merge keys
//! are rejected. Plain scalars resolve per YAML 1.1, matching how Ansible
//! reads module arguments.

mod canon;
mod node;
mod parser;
mod scalar;

pub use canon::{serialize_canonical, serialize_node};
pub use node::{NodeKind, Scalar, Span, YamlDocument, YamlNode};
pub use parser::{parse_stream, ParseError, MAX_DEPTH};
pub use scalar::{plain_safe, resolve_plain, resolve_scalar, ScalarStyle, ScalarValue};

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> YamlDocument {
        parse_stream(text, "test").unwrap()
    }

    fn root(text: &str) -> YamlNode {
        parse(text).roots.into_iter().next().expect("one root")
    }

    const FIG1: &str = "---\n\
- hosts: servers\n\
\x20 tasks:\n\
\x20   - name: Install SSH server\n\
\x20     ansible.builtin.apt:\n\
\x20       name: openssh-server\n\
\x20       state: present\n\
\x20   - name: Start SSH server\n\
\x20     ansible.builtin.service:\n\
\x20       name: ssh\n\
\x20       state: started\n";

    #[test]
    fn playbook_structure() {
        let doc = parse(FIG1);
        assert_eq!(doc.roots.len(), 1);
        let plays = doc.roots[0].as_sequence().expect("root sequence");
        assert_eq!(plays.len(), 1);
        let play = plays[0].as_mapping().expect("play mapping");
        let keys: Vec<String> = play.iter().map(|(k, _)| k.key_text().unwrap()).collect();
        assert_eq!(keys, ["hosts", "tasks"]);
        let tasks = plays[0].get("tasks").unwrap().as_sequence().unwrap();
        assert_eq!(tasks.len(), 2);
        assert_eq!(
            tasks[0].get("name").unwrap().resolved().unwrap(),
            ScalarValue::Text("Install SSH server".into())
        );
    }

    #[test]
    fn playbook_is_canonical_fixed_point() {
        let doc = parse(FIG1);
        assert_eq!(serialize_canonical(&doc), FIG1);
    }

    #[test]
    fn minimal_mapping() {
        let node = root("a: 1\n");
        let pairs = node.as_mapping().unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].1.resolved().unwrap(), ScalarValue::Int(1));
    }

    #[test]
    fn sequence_roundtrip() {
        let doc = parse("- x\n- y\n");
        let again = parse_stream(&serialize_canonical(&doc), "test").unwrap();
        assert_eq!(doc.roots, again.roots);
        assert_eq!(doc.roots[0].as_sequence().unwrap().len(), 2);
    }

    #[test]
    fn empty_document_serializes_to_marker() {
        let doc = parse("");
        assert!(doc.roots.is_empty());
        assert_eq!(serialize_canonical(&doc), "---\n");
        assert!(parse("---\n").roots.is_empty());
    }

    #[test]
    fn boolean_normalization() {
        let doc = parse("backup: yes\nenabled: Off\n");
        assert_eq!(serialize_canonical(&doc), "---\nbackup: true\nenabled: false\n");
    }

    #[test]
    fn quoted_strings_keep_their_kind() {
        let text = "a: \"yes\"\nb: '123'\nc: 0644\n";
        let out = serialize_canonical(&parse(text));
        assert_eq!(out, "---\na: 'yes'\nb: '123'\nc: 0644\n");
        let again = parse(&out);
        assert_eq!(
            again.roots[0].get("a").unwrap().resolved().unwrap(),
            ScalarValue::Text("yes".into())
        );
    }

    #[test]
    fn flow_collections() {
        let node = root("pkgs: [git, curl]\nopts: {a: 1, b: two}\n");
        assert_eq!(node.get("pkgs").unwrap().as_sequence().unwrap().len(), 2);
        assert_eq!(node.get("opts").unwrap().as_mapping().unwrap().len(), 2);
        // Canonical form is always block style.
        let out = serialize_node(&node);
        assert_eq!(out, "pkgs:\n  - git\n  - curl\nopts:\n  a: 1\n  b: two\n");
    }

    #[test]
    fn multiline_flow() {
        let node = root("list: [a,\n  b, c]\n");
        assert_eq!(node.get("list").unwrap().as_sequence().unwrap().len(), 3);
    }

    #[test]
    fn sequence_at_key_indent() {
        let node = root("tasks:\n- one\n- two\nafter: 3\n");
        assert_eq!(node.get("tasks").unwrap().as_sequence().unwrap().len(), 2);
        assert_eq!(node.get("after").unwrap().resolved().unwrap(), ScalarValue::Int(3));
    }

    #[test]
    fn literal_block_scalar() {
        let node = root("script: |\n  line one\n  line two\n");
        assert_eq!(
            node.get("script").unwrap().resolved().unwrap(),
            ScalarValue::Text("line one\nline two\n".into())
        );
    }

    #[test]
    fn folded_block_scalar() {
        let node = root("msg: >\n  folded\n  text\n\n  more\n");
        assert_eq!(
            node.get("msg").unwrap().resolved().unwrap(),
            ScalarValue::Text("folded text\nmore\n".into())
        );
    }

    #[test]
    fn block_scalar_chomping() {
        let node = root("a: |-\n  x\nb: |+\n  y\n\nc: 1\n");
        assert_eq!(node.get("a").unwrap().resolved().unwrap(), ScalarValue::Text("x".into()));
        assert_eq!(
            node.get("b").unwrap().resolved().unwrap(),
            ScalarValue::Text("y\n\n".into())
        );
    }

    #[test]
    fn multiline_text_roundtrips_via_literal() {
        let text = "cmd: \"first\\nsecond\"\n";
        let out = serialize_canonical(&parse(text));
        assert_eq!(out, "---\ncmd: |-\n  first\n  second\n");
        let reparsed = parse(&out);
        assert_eq!(
            reparsed.roots[0].get("cmd").unwrap().resolved().unwrap(),
            ScalarValue::Text("first\nsecond".into())
        );
    }

    #[test]
    fn comments_are_dropped() {
        let node = root("# leading\na: 1 # trailing\n# middle\nb: 2\n");
        assert_eq!(node.as_mapping().unwrap().len(), 2);
    }

    #[test]
    fn duplicate_key_is_error() {
        let err = parse_stream("a: 1\na: 2\n", "t").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateKey { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_key_by_resolved_value() {
        let err = parse_stream("yes: 1\ntrue: 2\n", "t").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateKey { .. }), "{err:?}");
    }

    #[test]
    fn anchors_aliases_tags_rejected() {
        for (text, feature) in [
            ("a: &x 1\n", "anchor"),
            ("a: *x\n", "alias"),
            ("a: !!str 1\n", "tag"),
            ("a: !vault |\n  x\n", "tag"),
            ("%YAML 1.1\n---\na: 1\n", "YAML directive"),
            ("? [a, b]\n: 1\n", "complex mapping key"),
        ] {
            let err = parse_stream(text, "t").unwrap_err();
            assert!(
                matches!(&err, ParseError::UnsupportedFeature { feature: f, .. } if f == feature),
                "{text:?} -> {err:?}"
            );
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_stream("a: [1, 2\n", "t").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err:?}");
        let err = parse_stream("key: value\n   dangling\n", "t").unwrap_err();
        assert_eq!(err.line(), 2);
    }

    #[test]
    fn tabs_in_indentation_rejected() {
        let err = parse_stream("a:\n\tb: 1\n", "t").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn depth_limit() {
        let mut text = String::new();
        for i in 0..(MAX_DEPTH + 2) {
            for _ in 0..i {
                text.push_str("  ");
            }
            text.push_str("k:\n");
        }
        let err = parse_stream(&text, "t").unwrap_err();
        assert!(err.to_string().contains("nesting depth"), "{err}");
    }

    #[test]
    fn multiple_documents() {
        let doc = parse("---\na: 1\n---\n- x\n...\n");
        assert_eq!(doc.roots.len(), 2);
        assert!(doc.roots[0].is_mapping());
        assert!(doc.roots[1].is_sequence());
        assert_eq!(serialize_canonical(&doc), "---\na: 1\n---\n- x\n");
    }

    #[test]
    fn null_values() {
        let node = root("a:\nb: ~\nc: null\n");
        assert!(node.get("a").unwrap().is_null());
        assert!(node.get("b").unwrap().is_null());
        assert!(node.get("c").unwrap().is_null());
        assert_eq!(serialize_node(&node), "a: null\nb: null\nc: null\n");
    }

    #[test]
    fn nested_sequence_inline() {
        let node = root("- - a\n  - b\n- c\n");
        let items = node.as_sequence().unwrap();
        assert_eq!(items[0].as_sequence().unwrap().len(), 2);
        assert_eq!(serialize_node(&node), "- - a\n  - b\n- c\n");
    }

    #[test]
    fn free_standing_dash_items() {
        let node = root("-\n  a: 1\n- x\n-\n");
        let items = node.as_sequence().unwrap();
        assert_eq!(items.len(), 3);
        assert!(items[0].is_mapping());
        assert!(items[2].is_null());
    }

    #[test]
    fn span_covers_block_node() {
        let doc = parse(FIG1);
        let plays = doc.roots[0].as_sequence().unwrap();
        let task = &plays[0].get("tasks").unwrap().as_sequence().unwrap()[0];
        assert_eq!(task.span.start_line, 4);
        assert_eq!(task.span.start_col, 7);
        assert_eq!(task.span.end_line, 7);
    }

    #[test]
    fn spans_slice_and_reparse() {
        // Padding the first line restores original columns; the slice must
        // re-parse to a structurally equal node.
        let doc = parse(FIG1);
        let plays = doc.roots[0].as_sequence().unwrap();
        let task = &plays[0].get("tasks").unwrap().as_sequence().unwrap()[0];
        let lines: Vec<&str> = FIG1.lines().collect();
        let mut slice = String::new();
        for _ in 0..task.span.start_col - 1 {
            slice.push(' ');
        }
        for (i, line) in lines
            .iter()
            .enumerate()
            .take(task.span.end_line)
            .skip(task.span.start_line - 1)
        {
            if i == task.span.start_line - 1 {
                slice.push_str(&line[task.span.start_col - 1..]);
            } else {
                slice.push_str(line);
            }
            slice.push('\n');
        }
        let reparsed = parse(&slice);
        assert_eq!(reparsed.roots[0], *task);
    }

    #[test]
    fn crlf_input() {
        let node = root("a: 1\r\nb: 2\r\n");
        assert_eq!(node.as_mapping().unwrap().len(), 2);
    }

    #[test]
    fn unicode_content() {
        let node = root("name: Установить пакет ✓\n");
        assert_eq!(
            node.get("name").unwrap().resolved().unwrap(),
            ScalarValue::Text("Установить пакет ✓".into())
        );
        let out = serialize_node(&node);
        let again = parse_stream(&out, "t").unwrap();
        assert_eq!(again.roots[0], node);
    }

    #[test]
    fn whole_stream_canonical_roundtrip() {
        for text in [
            FIG1,
            "a: {x: 1, y: [2, 3]}\n",
            "- 1\n- two\n- [3, four]\n",
            "key: >-\n  a\n  b\n",
            "empty_map: {}\nempty_list: []\n",
            "quoted: \"a: b\"\nmode: 0644\nver: 1.5\n",
        ] {
            let first = parse(text);
            let canon = serialize_canonical(&first);
            let second = parse_stream(&canon, "t").unwrap();
            assert_eq!(first.roots, second.roots, "{text:?}");
            assert_eq!(serialize_canonical(&second), canon, "{text:?}");
        }
    }
}
