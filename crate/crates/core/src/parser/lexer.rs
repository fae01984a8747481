use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Semi,
    Comma,
    Dot,
    Arrow,
    Dash,
    At,
    Bang,
    Star,
    /// `<<` or `«`
    TagOpen,
    /// `>>` or `»`
    TagClose,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(s) => format!("'{s}'"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Dash => "'-'".into(),
            Tok::At => "'@'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Star => "'*'".into(),
            Tok::TagOpen => "'<<'".into(),
            Tok::TagClose => "'>>'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

pub(crate) fn tokenize(src: &str, lines: &[&str]) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        let next = chars.get(i + 1).copied();
        let mut width = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
                continue;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    column += 1;
                }
                continue;
            }
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '@' => Tok::At,
            '!' => Tok::Bang,
            '*' => Tok::Star,
            '«' => Tok::TagOpen,
            '»' => Tok::TagClose,
            '-' if next == Some('>') => {
                width = 2;
                Tok::Arrow
            }
            // The en dash appears in printed tag names such as «FacM–Creator».
            '-' | '–' => Tok::Dash,
            '<' if next == Some('<') => {
                width = 2;
                Tok::TagOpen
            }
            '>' if next == Some('>') => {
                width = 2;
                Tok::TagClose
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i + width < chars.len() && chars[i + width].is_ascii_digit() {
                    width += 1;
                }
                Tok::Number(chars[start..start + width].iter().collect())
            }
            c if is_ident_start(c) => {
                let start = i;
                while i + width < chars.len() && is_ident_char(chars[i + width]) {
                    width += 1;
                }
                Tok::Ident(chars[start..start + width].iter().collect())
            }
            other => {
                return Err(ParseError::at(
                    lines,
                    pos.line,
                    pos.column,
                    format!("unexpected character '{other}'"),
                ))
            }
        };
        out.push(Token { tok, pos });
        i += width;
        column += width;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column },
    });
    Ok(out)
}
