//! Parser for the TREC SGML subset used by newswire collections.
//!
//! Grammar (tag names are case-insensitive, attributes are ignored):
//!
//! ```text
//! corpus    := (ws | doc)*
//! doc       := "<DOC>" (docno | text | other)* "</DOC>"
//! docno     := "<DOCNO>" chars "</DOCNO>"
//! text      := "<TEXT>" (para | chars | other)* "</TEXT>"
//! para      := "<P>" chars "</P>"
//! ```
//!
//! Every `<P>` block becomes one paragraph. A `<TEXT>` body without any
//! `<P>` becomes a single paragraph. Other elements (`<HEADLINE>`,
//! `<DATE_TIME>`, ...) are skipped along with their text. Paragraph text has
//! its whitespace collapsed and the five predefined entities decoded.

use crate::corpus::Document;
use crate::error::{Error, Result};

#[derive(Debug)]
enum Token<'a> {
    Open(&'a str),
    Close(&'a str),
    Text(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    /// Next token and its starting byte offset.
    fn next(&mut self, source: &str) -> Result<Option<(usize, Token<'a>)>> {
        let rest = &self.src[self.pos..];
        if rest.is_empty() {
            return Ok(None);
        }
        let start = self.pos;
        if !rest.starts_with('<') {
            let len = rest.find('<').unwrap_or(rest.len());
            self.pos += len;
            return Ok(Some((start, Token::Text(&rest[..len]))));
        }
        let Some(close) = rest.find('>') else {
            return Err(Error::data(format!("{source} (byte {start})"), "unterminated tag"));
        };
        self.pos += close + 1;
        let inner = rest[1..close].trim();
        let (closing, body) = match inner.strip_prefix('/') {
            Some(b) => (true, b.trim_start()),
            None => (false, inner),
        };
        let name = body.split_whitespace().next().unwrap_or("");
        if name.is_empty() {
            return Err(Error::data(format!("{source} (byte {start})"), "empty tag"));
        }
        if name.starts_with('!') || name.starts_with('?') {
            // Comment or declaration: treat as nothing.
            return self.next(source);
        }
        Ok(Some((
            start,
            if closing { Token::Close(name) } else { Token::Open(name) },
        )))
    }
}

#[derive(Default)]
struct DocBuilder {
    start: usize,
    docno: Option<String>,
    paragraphs: Vec<String>,
    loose: String,
    in_text: bool,
    field: Field,
    skip_depth: usize,
}

#[derive(Default, PartialEq)]
enum Field {
    #[default]
    None,
    DocNo(String),
    Para(String),
}

fn clean(text: &str) -> String {
    let decoded = text
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&");
    decoded.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub(crate) fn parse(source: &str, text: &str) -> Result<Vec<Document>> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let mut docs = Vec::new();
    let mut current: Option<DocBuilder> = None;
    let err = |at: usize, msg: String| Error::data(format!("{source} (byte {at})"), msg);

    while let Some((at, token)) = lexer.next(source)? {
        let Some(doc) = current.as_mut() else {
            match token {
                Token::Text(t) if t.trim().is_empty() => {}
                Token::Open(name) if name.eq_ignore_ascii_case("DOC") => {
                    current = Some(DocBuilder {
                        start: at,
                        ..DocBuilder::default()
                    });
                }
                Token::Text(_) => return Err(err(at, "text outside <DOC>".into())),
                Token::Open(name) | Token::Close(name) => {
                    return Err(err(at, format!("unexpected <{name}> outside <DOC>")))
                }
            }
            continue;
        };

        match token {
            Token::Text(t) => match &mut doc.field {
                Field::DocNo(buf) | Field::Para(buf) => buf.push_str(t),
                Field::None if doc.skip_depth == 0 && doc.in_text => {
                    doc.loose.push_str(t);
                    doc.loose.push(' ');
                }
                Field::None => {}
            },
            Token::Open(name) => {
                let upper = name.to_ascii_uppercase();
                match upper.as_str() {
                    "DOC" => return Err(err(at, "nested <DOC>".into())),
                    _ if doc.field != Field::None || doc.skip_depth > 0 => {
                        // Markup inside a field or skipped element: ignore.
                        if doc.skip_depth > 0 {
                            doc.skip_depth += 1;
                        }
                    }
                    "DOCNO" => doc.field = Field::DocNo(String::new()),
                    "TEXT" => doc.in_text = true,
                    "P" => doc.field = Field::Para(String::new()),
                    _ if doc.in_text => {}
                    _ => doc.skip_depth = 1,
                }
            }
            Token::Close(name) => {
                let upper = name.to_ascii_uppercase();
                if doc.skip_depth > 0 {
                    doc.skip_depth -= 1;
                    continue;
                }
                match (upper.as_str(), std::mem::take(&mut doc.field)) {
                    ("DOCNO", Field::DocNo(buf)) => {
                        if doc.docno.is_some() {
                            return Err(err(at, "second <DOCNO> in document".into()));
                        }
                        doc.docno = Some(buf.trim().to_string());
                    }
                    ("P", Field::Para(buf)) => {
                        let p = clean(&buf);
                        if !p.is_empty() {
                            doc.paragraphs.push(p);
                        }
                    }
                    ("TEXT", Field::None) => doc.in_text = false,
                    ("DOC", Field::None) => {
                        let mut d = current.take().expect("inside a document");
                        let Some(doc_id) = d.docno.take().filter(|id| !id.is_empty()) else {
                            return Err(err(d.start, "document without <DOCNO>".into()));
                        };
                        if d.paragraphs.is_empty() {
                            let loose = clean(&d.loose);
                            if !loose.is_empty() {
                                d.paragraphs.push(loose);
                            }
                        }
                        if d.paragraphs.is_empty() {
                            return Err(err(d.start, format!("document {doc_id} has no text")));
                        }
                        docs.push(Document {
                            doc_id,
                            paragraphs: d.paragraphs,
                        });
                    }
                    (_, field @ (Field::DocNo(_) | Field::Para(_))) => {
                        // Closing markup nested inside a field, e.g. </B> in <P>.
                        doc.field = field;
                    }
                    (_, Field::None) => {}
                }
            }
        }
    }
    if let Some(d) = current {
        return Err(err(d.start, "unterminated <DOC>".into()));
    }
    Ok(docs)
}
