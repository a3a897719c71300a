//! Tiny arithmetic evaluator for angle and amplitude literals.
//!
//! Grammar: `+ - * /`, parentheses, unary minus, decimal numbers,
//! the constants `pi` and `i`, and the functions `sqrt`, `sin`, `cos`,
//! `acos`, `asin`, `atan`, `exp`.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent: only when followed by a digit or a signed digit.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| format!("bad number `{text}`"))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Complex64, String> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Complex64, String> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Tok::Op(c @ ('*' | '/'))) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = if c == '*' { acc * rhs } else { acc / rhs };
                }
                // Implicit product such as `2i` or `3pi`.
                Some(Tok::Ident(_)) | Some(Tok::Op('(')) => {
                    let rhs = self.unary()?;
                    acc *= rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Complex64, String> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Complex64, String> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Complex64::new(v, 0.0)),
            Some(Tok::Op('(')) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Tok::Op(')')) => Ok(v),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "pi" => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
                "i" => Ok(Complex64::i()),
                f => {
                    match self.next() {
                        Some(Tok::Op('(')) => {}
                        _ => return Err(format!("unknown identifier `{f}`")),
                    }
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Tok::Op(')')) => {}
                        _ => return Err("missing `)`".into()),
                    }
                    apply(f, arg)
                }
            },
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

fn apply(f: &str, z: Complex64) -> Result<Complex64, String> {
    Ok(match f {
        "sqrt" => z.sqrt(),
        "exp" => z.exp(),
        "sin" => z.sin(),
        "cos" => z.cos(),
        "acos" => Complex64::new(real_arg(f, z)?.acos(), 0.0),
        "asin" => Complex64::new(real_arg(f, z)?.asin(), 0.0),
        "atan" => Complex64::new(real_arg(f, z)?.atan(), 0.0),
        _ => return Err(format!("unknown function `{f}`")),
    })
}

fn real_arg(f: &str, z: Complex64) -> Result<f64, String> {
    if z.im != 0.0 {
        return Err(format!("`{f}` needs a real argument"));
    }
    Ok(z.re)
}

/// Evaluate a possibly complex expression.
pub fn eval_complex(s: &str) -> Result<Complex64, String> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { toks, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input in `{s}`"));
    }
    Ok(v)
}

/// Evaluate an expression that must be real.
pub fn eval_real(s: &str) -> Result<f64, String> {
    let z = eval_complex(s)?;
    if z.im != 0.0 {
        return Err(format!("`{s}` is not real"));
    }
    Ok(z.re)
}
