//! Recursive-descent parser for the YAML subset used by Ansible content:
//! block and flow collections, plain/quoted scalars, literal and folded
//! block scalars, comments, and document markers. Anchors, aliases, tags,
//! directives and complex keys are rejected as unsupported; duplicate
//! mapping keys are a hard error.

use thiserror::Error;

use crate::yaml::node::{Scalar, Span, YamlDocument, YamlNode};
use crate::yaml::scalar::ScalarStyle;

/// Recursion bound for nested collections.
pub const MAX_DEPTH: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{source_name}:{line}:{column}: syntax error: {message}")]
    Syntax { source_name: String, line: usize, column: usize, message: String },
    #[error("{source_name}:{line}:{column}: unsupported feature: {feature}")]
    UnsupportedFeature { source_name: String, line: usize, column: usize, feature: String },
    #[error("{source_name}:{line}:{column}: duplicate mapping key `{key}`")]
    DuplicateKey { source_name: String, line: usize, column: usize, key: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnsupportedFeature { line, .. }
            | ParseError::DuplicateKey { line, .. } => *line,
        }
    }

    pub fn column(&self) -> usize {
        match self {
            ParseError::Syntax { column, .. }
            | ParseError::UnsupportedFeature { column, .. }
            | ParseError::DuplicateKey { column, .. } => *column,
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

/// Parse a UTF-8 stream into its documents.
pub fn parse_stream(text: &str, source_name: &str) -> Result<YamlDocument> {
    let mut parser = Parser::new(text, source_name);
    let roots = parser.parse_documents()?;
    Ok(YamlDocument::new(roots, source_name))
}

/// One physical line as characters, without the trailing newline.
struct Line {
    chars: Vec<char>,
    indent: usize,
    blank: bool,
}

struct Parser<'a> {
    lines: Vec<Line>,
    li: usize,
    source_name: &'a str,
}

/// What kind of line the block layer is looking at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineClass {
    Content,
    DocStart,
    DocEnd,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, source_name: &'a str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let lines = text
            .split('\n')
            .map(|l| {
                let l = l.strip_suffix('\r').unwrap_or(l);
                let chars: Vec<char> = l.chars().collect();
                let indent = chars.iter().take_while(|&&c| c == ' ').count();
                let blank = chars.iter().all(|c| c.is_whitespace());
                Line { chars, indent, blank }
            })
            .collect();
        Parser { lines, li: 0, source_name }
    }

    fn syntax(&self, line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            source_name: self.source_name.to_string(),
            line,
            column: col,
            message: message.into(),
        }
    }

    fn unsupported(&self, line: usize, col: usize, feature: impl Into<String>) -> ParseError {
        ParseError::UnsupportedFeature {
            source_name: self.source_name.to_string(),
            line,
            column: col,
            feature: feature.into(),
        }
    }

    fn line(&self, li: usize) -> &Line {
        &self.lines[li]
    }

    fn at(&self, li: usize, col: usize) -> Option<char> {
        self.lines.get(li).and_then(|l| l.chars.get(col)).copied()
    }

    /// Comment-or-nothing from `col` to end of line.
    fn rest_is_ignorable(&self, li: usize, col: usize) -> bool {
        let line = self.line(li);
        let mut i = col;
        while i < line.chars.len() && line.chars[i] == ' ' {
            i += 1;
        }
        i >= line.chars.len() || (line.chars[i] == '#' && (i == col || line.chars[i - 1] == ' '))
    }

    fn classify(&self, li: usize) -> LineClass {
        let line = self.line(li);
        if line.indent == 0 && line.chars.len() >= 3 {
            let lead: String = line.chars[..3].iter().collect();
            let after = line.chars.get(3).copied();
            let boundary = after.is_none() || after == Some(' ') || after == Some('\t');
            if lead == "---" && boundary {
                return LineClass::DocStart;
            }
            if lead == "..." && boundary {
                return LineClass::DocEnd;
            }
        }
        LineClass::Content
    }

    /// Advance `li` past blank and comment-only lines; reject tab indentation
    /// on the significant line that stops the scan.
    fn next_significant(&self, mut li: usize) -> Option<usize> {
        while li < self.lines.len() {
            let line = self.line(li);
            if line.blank {
                li += 1;
                continue;
            }
            let first = line.chars[line.indent];
            if first == '#' {
                li += 1;
                continue;
            }
            return Some(li);
        }
        None
    }

    fn check_indentation(&self, li: usize) -> Result<()> {
        let line = self.line(li);
        let ws_end = line.chars.iter().take_while(|c| c.is_whitespace()).count();
        if line.chars[..ws_end].contains(&'\t') {
            return Err(self.syntax(li + 1, 1, "tab characters are not allowed in indentation"));
        }
        Ok(())
    }

    fn parse_documents(&mut self) -> Result<Vec<YamlNode>> {
        let mut roots = Vec::new();
        loop {
            let Some(li) = self.next_significant(self.li) else { break };
            self.check_indentation(li)?;
            self.li = li;
            match self.classify(li) {
                LineClass::DocStart => {
                    if !self.rest_is_ignorable(li, 3) {
                        return Err(self.syntax(
                            li + 1,
                            4,
                            "content on the `---` line is not supported",
                        ));
                    }
                    self.li = li + 1;
                    continue;
                }
                LineClass::DocEnd => {
                    self.li = li + 1;
                    continue;
                }
                LineClass::Content => {}
            }
            let line = self.line(li);
            if line.indent == 0 && line.chars[0] == '%' {
                return Err(self.unsupported(li + 1, 1, "YAML directive"));
            }
            let indent = line.indent;
            let node = self.parse_value(li, indent, indent as isize - 1, false, 0)?;
            roots.push(node);
            // Only markers or EOF may follow a completed document root.
            if let Some(next) = self.next_significant(self.li) {
                if self.classify(next) == LineClass::Content {
                    let l = self.line(next);
                    return Err(self.syntax(
                        next + 1,
                        l.indent + 1,
                        "unexpected content after document root",
                    ));
                }
            }
        }
        Ok(roots)
    }

    /// Parse the node starting at `(li, col)`.
    ///
    /// `parent_indent` is the column of the enclosing construct (-1 at the
    /// root); block scalar content must be indented past it. `inline` is set
    /// when the node is a mapping value on the same line as its key, where
    /// block collections are not allowed.
    fn parse_value(
        &mut self,
        li: usize,
        col: usize,
        parent_indent: isize,
        inline: bool,
        depth: usize,
    ) -> Result<YamlNode> {
        if depth > MAX_DEPTH {
            return Err(self.syntax(li + 1, col + 1, "maximum nesting depth exceeded"));
        }
        let c = self
            .at(li, col)
            .ok_or_else(|| self.syntax(li + 1, col + 1, "expected a value"))?;
        match c {
            '|' | '>' => self.parse_block_scalar(li, col, parent_indent),
            '&' => Err(self.unsupported(li + 1, col + 1, "anchor")),
            '*' => Err(self.unsupported(li + 1, col + 1, "alias")),
            '!' => Err(self.unsupported(li + 1, col + 1, "tag")),
            '%' => Err(self.unsupported(li + 1, col + 1, "YAML directive")),
            '@' | '`' => Err(self.syntax(li + 1, col + 1, format!("reserved indicator `{c}`"))),
            '?' if self.is_indicator(li, col) => {
                Err(self.unsupported(li + 1, col + 1, "complex mapping key"))
            }
            ':' if self.is_indicator(li, col) => {
                Err(self.syntax(li + 1, col + 1, "mapping value without a key"))
            }
            '-' if self.is_indicator(li, col) => {
                if inline {
                    Err(self.syntax(
                        li + 1,
                        col + 1,
                        "block sequence entries are not allowed on the same line as a mapping key",
                    ))
                } else {
                    self.parse_block_sequence(li, col, depth)
                }
            }
            '[' | '{' => {
                let (node, end_li, end_col) = self.parse_flow_value(li, col, depth)?;
                self.finish_inline_node(node, end_li, end_col, inline, depth, true)
            }
            '"' | '\'' => {
                let (scalar, span, end_col) = self.parse_quoted(li, col)?;
                let node = YamlNode::scalar(scalar, span);
                self.finish_inline_node(node, li, end_col, inline, depth, false)
            }
            _ => self.parse_plain_or_mapping(li, col, inline, depth),
        }
    }

    /// `-`, `?`, `:` act as indicators only when followed by space or EOL.
    fn is_indicator(&self, li: usize, col: usize) -> bool {
        matches!(self.at(li, col + 1), None | Some(' '))
    }

    /// After a quoted scalar or flow collection, decide whether it is a
    /// mapping key (`: ` follows) or a complete node.
    fn finish_inline_node(
        &mut self,
        node: YamlNode,
        li: usize,
        end_col: usize,
        inline: bool,
        depth: usize,
        was_flow: bool,
    ) -> Result<YamlNode> {
        let mut i = end_col;
        while self.at(li, i) == Some(' ') {
            i += 1;
        }
        if self.at(li, i) == Some(':') && self.is_indicator(li, i) {
            if was_flow {
                return Err(self.syntax(li + 1, i + 1, "mapping keys must be scalars"));
            }
            if inline {
                return Err(self.syntax(
                    li + 1,
                    i + 1,
                    "mapping is not allowed on the same line as another mapping key",
                ));
            }
            let key_col = node.span.start_col - 1;
            return self.parse_block_mapping(li, key_col, depth);
        }
        if !self.rest_is_ignorable(li, end_col) {
            return Err(self.syntax(li + 1, end_col + 1, "unexpected content after value"));
        }
        self.li = li + 1;
        Ok(node)
    }

    /// Plain token at `(li, col)`: either a scalar node or the first key of a
    /// block mapping, depending on whether a `: ` terminator shows up.
    fn parse_plain_or_mapping(
        &mut self,
        li: usize,
        col: usize,
        inline: bool,
        depth: usize,
    ) -> Result<YamlNode> {
        let (token_end, colon) = self.scan_plain(li, col);
        if let Some(colon_col) = colon {
            if inline {
                return Err(self.syntax(
                    li + 1,
                    colon_col + 1,
                    "mapping is not allowed on the same line as another mapping key",
                ));
            }
            return self.parse_block_mapping(li, col, depth);
        }
        let raw: String = self.line(li).chars[col..token_end].iter().collect();
        let raw = raw.trim_end().to_string();
        if !self.rest_is_ignorable(li, token_end) {
            return Err(self.syntax(li + 1, token_end + 1, "unexpected content after scalar"));
        }
        let end_col = col + raw.chars().count();
        let span = Span::new(li + 1, col + 1, li + 1, end_col + 1);
        self.li = li + 1;
        Ok(YamlNode::scalar(Scalar::plain(raw), span))
    }

    /// Scan a plain token from `col`. Returns the exclusive end of the token
    /// and the column of a `: ` / `:`-EOL terminator when one ends it.
    fn scan_plain(&self, li: usize, col: usize) -> (usize, Option<usize>) {
        let chars = &self.line(li).chars;
        let mut i = col;
        while i < chars.len() {
            let c = chars[i];
            if c == ':' && matches!(chars.get(i + 1), None | Some(' ')) {
                return (i, Some(i));
            }
            if c == '#' && i > col && chars[i - 1] == ' ' {
                return (i, None);
            }
            i += 1;
        }
        (i, None)
    }

    fn parse_quoted(&self, li: usize, col: usize) -> Result<(Scalar, Span, usize)> {
        let chars = &self.line(li).chars;
        let quote = chars[col];
        let mut out = String::new();
        let mut i = col + 1;
        if quote == '\'' {
            loop {
                match chars.get(i) {
                    None => {
                        return Err(self.syntax(
                            li + 1,
                            col + 1,
                            "unterminated single-quoted scalar (multi-line strings use block scalars)",
                        ))
                    }
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        out.push('\'');
                        i += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(&c) => {
                        out.push(c);
                        i += 1;
                    }
                }
            }
            let span = Span::new(li + 1, col + 1, li + 1, i + 1);
            return Ok((Scalar::new(out, ScalarStyle::SingleQuoted), span, i));
        }
        loop {
            match chars.get(i) {
                None => {
                    return Err(self.syntax(
                        li + 1,
                        col + 1,
                        "unterminated double-quoted scalar (multi-line strings use block scalars)",
                    ))
                }
                Some('"') => {
                    i += 1;
                    break;
                }
                Some('\\') => {
                    let esc = chars.get(i + 1).copied().ok_or_else(|| {
                        self.syntax(li + 1, i + 2, "incomplete escape sequence")
                    })?;
                    let (ch, used) = match esc {
                        'n' => ('\n', 2),
                        't' => ('\t', 2),
                        'r' => ('\r', 2),
                        '0' => ('\0', 2),
                        'b' => ('\u{8}', 2),
                        'f' => ('\u{c}', 2),
                        'a' => ('\u{7}', 2),
                        'e' => ('\u{1b}', 2),
                        '\\' => ('\\', 2),
                        '"' => ('"', 2),
                        '/' => ('/', 2),
                        ' ' => (' ', 2),
                        'x' => (self.hex_escape(li, chars, i + 2, 2)?, 4),
                        'u' => (self.hex_escape(li, chars, i + 2, 4)?, 6),
                        other => {
                            return Err(self.syntax(
                                li + 1,
                                i + 2,
                                format!("unknown escape sequence `\\{other}`"),
                            ))
                        }
                    };
                    out.push(ch);
                    i += used;
                }
                Some(&c) => {
                    out.push(c);
                    i += 1;
                }
            }
        }
        let span = Span::new(li + 1, col + 1, li + 1, i + 1);
        Ok((Scalar::new(out, ScalarStyle::DoubleQuoted), span, i))
    }

    fn hex_escape(&self, li: usize, chars: &[char], start: usize, len: usize) -> Result<char> {
        if start + len > chars.len() {
            return Err(self.syntax(li + 1, start + 1, "incomplete hex escape"));
        }
        let hex: String = chars[start..start + len].iter().collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.syntax(li + 1, start + 1, "invalid hex escape"))
    }

    fn parse_block_mapping(&mut self, li: usize, indent: usize, depth: usize) -> Result<YamlNode> {
        let mut pairs: Vec<(YamlNode, YamlNode)> = Vec::new();
        let mut cur_li = li;
        let start = Span::new(li + 1, indent + 1, li + 1, indent + 1);
        loop {
            let (key, colon_col) = self.parse_mapping_key(cur_li, indent)?;
            if let Some((dup_key, _)) = pairs.iter().find(|(k, _)| *k == key) {
                return Err(ParseError::DuplicateKey {
                    source_name: self.source_name.to_string(),
                    line: key.span.start_line,
                    column: key.span.start_col,
                    key: dup_key
                        .key_text()
                        .unwrap_or_default(),
                });
            }
            let value = self.parse_mapping_value(cur_li, colon_col + 1, indent, depth)?;
            pairs.push((key, value));

            let Some(next) = self.next_significant(self.li) else { break };
            if self.classify(next) != LineClass::Content {
                break;
            }
            self.check_indentation(next)?;
            let line = self.line(next);
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(self.syntax(
                    next + 1,
                    line.indent + 1,
                    "unexpected indentation (multi-line plain scalars are not supported)",
                ));
            }
            if line.chars[indent] == '-' && self.is_indicator(next, indent) {
                return Err(self.syntax(
                    next + 1,
                    indent + 1,
                    "sequence entry where a mapping key was expected",
                ));
            }
            cur_li = next;
        }
        let end = pairs
            .last()
            .map(|(_, v)| v.span)
            .unwrap_or(start);
        let span = Span::new(li + 1, indent + 1, end.end_line, end.end_col);
        Ok(YamlNode::mapping(pairs, span))
    }

    /// Parse the key scalar of the entry that starts at `(li, indent)`.
    /// Returns the key node and the column of the `:` that follows it.
    fn parse_mapping_key(&mut self, li: usize, indent: usize) -> Result<(YamlNode, usize)> {
        let c = self.at(li, indent).unwrap();
        match c {
            '"' | '\'' => {
                let (scalar, span, end_col) = self.parse_quoted(li, indent)?;
                let mut i = end_col;
                while self.at(li, i) == Some(' ') {
                    i += 1;
                }
                if self.at(li, i) == Some(':') && self.is_indicator(li, i) {
                    Ok((YamlNode::scalar(scalar, span), i))
                } else {
                    Err(self.syntax(li + 1, i + 1, "expected `:` after mapping key"))
                }
            }
            '&' => Err(self.unsupported(li + 1, indent + 1, "anchor")),
            '*' => Err(self.unsupported(li + 1, indent + 1, "alias")),
            '!' => Err(self.unsupported(li + 1, indent + 1, "tag")),
            '?' if self.is_indicator(li, indent) => {
                Err(self.unsupported(li + 1, indent + 1, "complex mapping key"))
            }
            '[' | '{' => Err(self.syntax(li + 1, indent + 1, "mapping keys must be scalars")),
            _ => {
                let (end, colon) = self.scan_plain(li, indent);
                match colon {
                    Some(colon_col) => {
                        let raw: String =
                            self.line(li).chars[indent..end].iter().collect();
                        let raw = raw.trim_end().to_string();
                        let span =
                            Span::new(li + 1, indent + 1, li + 1, indent + raw.chars().count() + 1);
                        Ok((YamlNode::scalar(Scalar::plain(raw), span), colon_col))
                    }
                    None => Err(self.syntax(
                        li + 1,
                        indent + 1,
                        "expected a `key: value` mapping entry",
                    )),
                }
            }
        }
    }

    /// Value of a mapping entry; `col` is just after the colon.
    fn parse_mapping_value(
        &mut self,
        li: usize,
        col: usize,
        key_indent: usize,
        depth: usize,
    ) -> Result<YamlNode> {
        let mut i = col;
        while self.at(li, i) == Some(' ') {
            i += 1;
        }
        let line_len = self.line(li).chars.len();
        if i < line_len && !self.rest_is_ignorable(li, i) {
            // Value on the same line as the key.
            return self.parse_value(li, i, key_indent as isize, true, depth + 1);
        }
        // Value nested on the following lines, or missing entirely.
        self.li = li + 1;
        if let Some(next) = self.next_significant(self.li) {
            if self.classify(next) == LineClass::Content {
                self.check_indentation(next)?;
                let line = self.line(next);
                if line.indent > key_indent {
                    return self.parse_value(
                        next,
                        line.indent,
                        key_indent as isize,
                        false,
                        depth + 1,
                    );
                }
                // Ansible style allows a sequence value at the key's own indent.
                if line.indent == key_indent
                    && line.chars[line.indent] == '-'
                    && self.is_indicator(next, line.indent)
                {
                    return self.parse_block_sequence(next, line.indent, depth + 1);
                }
            }
        }
        let span = Span::new(li + 1, col + 1, li + 1, col + 1);
        Ok(YamlNode::scalar(Scalar::plain(String::new()), span))
    }

    fn parse_block_sequence(&mut self, li: usize, indent: usize, depth: usize) -> Result<YamlNode> {
        let mut items = Vec::new();
        let mut cur_li = li;
        loop {
            let item = self.parse_sequence_item(cur_li, indent, depth)?;
            items.push(item);

            let Some(next) = self.next_significant(self.li) else { break };
            if self.classify(next) != LineClass::Content {
                break;
            }
            self.check_indentation(next)?;
            let line = self.line(next);
            if line.indent < indent {
                break;
            }
            if line.indent > indent {
                return Err(self.syntax(
                    next + 1,
                    line.indent + 1,
                    "unexpected indentation (multi-line plain scalars are not supported)",
                ));
            }
            if !(line.chars[indent] == '-' && self.is_indicator(next, indent)) {
                break;
            }
            cur_li = next;
        }
        let end = items.last().map(|n| n.span).unwrap();
        let span = Span::new(li + 1, indent + 1, end.end_line, end.end_col);
        Ok(YamlNode::sequence(items, span))
    }

    /// One `- item` entry with its dash at `(li, dash_col)`.
    fn parse_sequence_item(&mut self, li: usize, dash_col: usize, depth: usize) -> Result<YamlNode> {
        let mut i = dash_col + 1;
        while self.at(li, i) == Some(' ') {
            i += 1;
        }
        let line_len = self.line(li).chars.len();
        if i < line_len && !self.rest_is_ignorable(li, i) {
            return self.parse_value(li, i, dash_col as isize, false, depth + 1);
        }
        // `-` alone: the item is nested on the following lines, or null.
        self.li = li + 1;
        if let Some(next) = self.next_significant(self.li) {
            if self.classify(next) == LineClass::Content {
                self.check_indentation(next)?;
                let line = self.line(next);
                if line.indent > dash_col {
                    return self.parse_value(
                        next,
                        line.indent,
                        dash_col as isize,
                        false,
                        depth + 1,
                    );
                }
            }
        }
        let span = Span::new(li + 1, dash_col + 2, li + 1, dash_col + 2);
        Ok(YamlNode::scalar(Scalar::plain(String::new()), span))
    }

    // ------------------------------------------------------------------
    // Flow collections
    // ------------------------------------------------------------------

    /// Parse a flow node starting at `(li, col)`. Returns the node and the
    /// position just past its closing bracket. Flow content may span lines.
    fn parse_flow_value(
        &mut self,
        li: usize,
        col: usize,
        depth: usize,
    ) -> Result<(YamlNode, usize, usize)> {
        let mut pos = (li, col);
        let node = self.flow_node(&mut pos, depth)?;
        Ok((node, pos.0, pos.1))
    }

    fn flow_skip_ws(&self, pos: &mut (usize, usize)) -> Result<()> {
        loop {
            match self.at(pos.0, pos.1) {
                Some(' ') | Some('\t') => pos.1 += 1,
                Some('#')
                    if pos.1 == 0
                        || self.at(pos.0, pos.1 - 1) == Some(' ')
                        || self.at(pos.0, pos.1 - 1).is_none() =>
                {
                    pos.1 = self.line(pos.0).chars.len();
                }
                Some(_) => return Ok(()),
                None => {
                    if pos.0 + 1 >= self.lines.len() {
                        return Err(self.syntax(
                            pos.0 + 1,
                            pos.1 + 1,
                            "unterminated flow collection",
                        ));
                    }
                    pos.0 += 1;
                    pos.1 = 0;
                }
            }
        }
    }

    fn flow_node(&mut self, pos: &mut (usize, usize), depth: usize) -> Result<YamlNode> {
        if depth > MAX_DEPTH {
            return Err(self.syntax(pos.0 + 1, pos.1 + 1, "maximum nesting depth exceeded"));
        }
        self.flow_skip_ws(pos)?;
        let (li, col) = *pos;
        match self.at(li, col) {
            Some('[') => self.flow_sequence(pos, depth),
            Some('{') => self.flow_mapping(pos, depth),
            Some('&') => Err(self.unsupported(li + 1, col + 1, "anchor")),
            Some('*') => Err(self.unsupported(li + 1, col + 1, "alias")),
            Some('!') => Err(self.unsupported(li + 1, col + 1, "tag")),
            Some('"') | Some('\'') => {
                let (scalar, span, end_col) = self.parse_quoted(li, col)?;
                *pos = (li, end_col);
                Ok(YamlNode::scalar(scalar, span))
            }
            _ => self.flow_plain(pos),
        }
    }

    fn flow_sequence(&mut self, pos: &mut (usize, usize), depth: usize) -> Result<YamlNode> {
        let (start_li, start_col) = *pos;
        pos.1 += 1;
        let mut items = Vec::new();
        loop {
            self.flow_skip_ws(pos)?;
            if self.at(pos.0, pos.1) == Some(']') {
                pos.1 += 1;
                break;
            }
            let item = self.flow_node(pos, depth + 1)?;
            items.push(item);
            self.flow_skip_ws(pos)?;
            match self.at(pos.0, pos.1) {
                Some(',') => pos.1 += 1,
                Some(']') => {
                    pos.1 += 1;
                    break;
                }
                _ => {
                    return Err(self.syntax(
                        pos.0 + 1,
                        pos.1 + 1,
                        "expected `,` or `]` in flow sequence",
                    ))
                }
            }
        }
        let span = Span::new(start_li + 1, start_col + 1, pos.0 + 1, pos.1 + 1);
        Ok(YamlNode::sequence(items, span))
    }

    fn flow_mapping(&mut self, pos: &mut (usize, usize), depth: usize) -> Result<YamlNode> {
        let (start_li, start_col) = *pos;
        pos.1 += 1;
        let mut pairs: Vec<(YamlNode, YamlNode)> = Vec::new();
        loop {
            self.flow_skip_ws(pos)?;
            if self.at(pos.0, pos.1) == Some('}') {
                pos.1 += 1;
                break;
            }
            let key = self.flow_node(pos, depth + 1)?;
            if !key.is_scalar() {
                return Err(self.syntax(
                    key.span.start_line,
                    key.span.start_col,
                    "mapping keys must be scalars",
                ));
            }
            if let Some((dup, _)) = pairs.iter().find(|(k, _)| *k == key) {
                return Err(ParseError::DuplicateKey {
                    source_name: self.source_name.to_string(),
                    line: key.span.start_line,
                    column: key.span.start_col,
                    key: dup.key_text().unwrap_or_default(),
                });
            }
            self.flow_skip_ws(pos)?;
            let value = if self.at(pos.0, pos.1) == Some(':') {
                pos.1 += 1;
                self.flow_node(pos, depth + 1)?
            } else {
                YamlNode::scalar(
                    Scalar::plain(String::new()),
                    Span::new(pos.0 + 1, pos.1 + 1, pos.0 + 1, pos.1 + 1),
                )
            };
            pairs.push((key, value));
            self.flow_skip_ws(pos)?;
            match self.at(pos.0, pos.1) {
                Some(',') => pos.1 += 1,
                Some('}') => {
                    pos.1 += 1;
                    break;
                }
                _ => {
                    return Err(self.syntax(
                        pos.0 + 1,
                        pos.1 + 1,
                        "expected `,` or `}` in flow mapping",
                    ))
                }
            }
        }
        let span = Span::new(start_li + 1, start_col + 1, pos.0 + 1, pos.1 + 1);
        Ok(YamlNode::mapping(pairs, span))
    }

    /// Plain scalar inside a flow collection; terminated by flow indicators
    /// or a `: ` pair separator, matching YAML 1.1 behavior where `a:1`
    /// remains a single token.
    fn flow_plain(&mut self, pos: &mut (usize, usize)) -> Result<YamlNode> {
        let (li, col) = *pos;
        let chars = &self.line(li).chars;
        let mut i = col;
        while i < chars.len() {
            let c = chars[i];
            if matches!(c, ',' | '[' | ']' | '{' | '}') {
                break;
            }
            if c == ':' && matches!(chars.get(i + 1), None | Some(' ') | Some(',') | Some(']') | Some('}')) {
                break;
            }
            if c == '#' && i > col && chars[i - 1] == ' ' {
                break;
            }
            i += 1;
        }
        let raw: String = chars[col..i].iter().collect();
        let raw = raw.trim_end().to_string();
        if raw.is_empty() {
            return Err(self.syntax(li + 1, col + 1, "empty flow entry"));
        }
        let end_col = col + raw.chars().count();
        *pos = (li, end_col);
        let span = Span::new(li + 1, col + 1, li + 1, end_col + 1);
        Ok(YamlNode::scalar(Scalar::plain(raw), span))
    }

    // ------------------------------------------------------------------
    // Block scalars
    // ------------------------------------------------------------------

    fn parse_block_scalar(
        &mut self,
        li: usize,
        col: usize,
        parent_indent: isize,
    ) -> Result<YamlNode> {
        let chars = &self.line(li).chars;
        let style = if chars[col] == '|' { ScalarStyle::Literal } else { ScalarStyle::Folded };
        let mut i = col + 1;
        let mut explicit_indent: Option<usize> = None;
        let mut chomp: Option<char> = None;
        while let Some(&c) = chars.get(i) {
            match c {
                '1'..='9' if explicit_indent.is_none() => {
                    explicit_indent = Some(c as usize - '0' as usize);
                    i += 1;
                }
                '+' | '-' if chomp.is_none() => {
                    chomp = Some(c);
                    i += 1;
                }
                _ => break,
            }
        }
        if !self.rest_is_ignorable(li, i) {
            return Err(self.syntax(li + 1, i + 1, "unexpected content after block scalar header"));
        }

        // Collect raw content lines; comments and blank lines are content here.
        let base = parent_indent.max(-1);
        let detected = explicit_indent.map(|d| (base.max(0) as usize) + d);
        let mut content_indent = detected;
        let mut lines: Vec<String> = Vec::new();
        let mut next = li + 1;
        while next < self.lines.len() {
            let line = self.line(next);
            if line.blank {
                let upto = content_indent.unwrap_or(line.chars.len().min(usize::MAX));
                let text: String = line.chars.iter().skip(upto).collect();
                lines.push(text.trim_end().to_string());
                next += 1;
                continue;
            }
            if (line.indent as isize) <= base {
                break;
            }
            if self.classify(next) != LineClass::Content {
                break;
            }
            let ci = match content_indent {
                Some(ci) => {
                    if line.indent < ci {
                        break;
                    }
                    ci
                }
                None => {
                    content_indent = Some(line.indent);
                    line.indent
                }
            };
            let text: String = line.chars.iter().skip(ci).collect();
            lines.push(text);
            next += 1;
        }
        self.li = next;

        // Separate trailing blank lines for chomping.
        let mut trailing = 0;
        while trailing < lines.len() && lines[lines.len() - 1 - trailing].trim().is_empty() {
            trailing += 1;
        }
        let body_lines = &lines[..lines.len() - trailing];
        let body = match style {
            ScalarStyle::Literal => body_lines.join("\n"),
            _ => fold_lines(body_lines),
        };
        let content = match chomp {
            Some('-') => body,
            Some('+') => {
                if body.is_empty() {
                    "\n".repeat(trailing)
                } else {
                    body + &"\n".repeat(trailing + 1)
                }
            }
            _ => {
                if body.is_empty() {
                    String::new()
                } else {
                    body + "\n"
                }
            }
        };
        let end_line = if next > li + 1 { next } else { li + 1 };
        let span = Span::new(
            li + 1,
            col + 1,
            end_line,
            self.lines.get(end_line - 1).map(|l| l.chars.len() + 1).unwrap_or(1),
        );
        Ok(YamlNode::scalar(Scalar::new(content, style), span))
    }
}

/// Folding for `>` scalars: single line breaks between two simple lines
/// become spaces; breaks adjacent to blank or more-indented lines stay
/// literal.
fn fold_lines(lines: &[String]) -> String {
    let info: Vec<(bool, bool)> = lines
        .iter()
        .map(|l| (l.trim().is_empty(), l.starts_with(' ') && !l.trim().is_empty()))
        .collect();
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        let (empty, more) = info[i];
        if i > 0 {
            let (p_empty, p_more) = info[i - 1];
            if !p_empty && !p_more && !empty && !more {
                out.push(' ');
            } else if empty {
                out.push('\n');
            } else if !p_empty {
                out.push('\n');
            }
        }
        if !empty {
            out.push_str(line);
        }
    }
    out
}
