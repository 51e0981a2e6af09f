//! Arithmetic expressions for numeric flags: `0.5`, `1/sqrt(2)`,
//! `sqrt(2)/sqrt(3)`, `kbar/2`.

/// Evaluates `text`. The identifier `kbar` takes the value `kbar`, or is an
/// error when `None`.
pub fn evaluate(text: &str, kbar: Option<f64>) -> Result<f64, String> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, kbar };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(format!("unexpected `{}` in `{text}`", &text[p.pos..]));
    }
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v)
}

/// Splits a comma-separated list; commas inside parentheses are not separators.
pub fn split_list(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    kbar: Option<f64>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        loop {
            if self.eat(b'+') {
                v += self.product()?;
            } else if self.eat(b'-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.skip_ws();
        if self.eat(b'(') {
            let v = self.sum()?;
            return if self.eat(b')') { Ok(v) } else { Err("missing `)`".into()) };
        }
        let start = self.pos;
        let rest = &self.s[start..];
        if rest.first().is_some_and(|c| c.is_ascii_alphabetic()) {
            let len = rest.iter().take_while(|c| c.is_ascii_alphanumeric() || **c == b'_').count();
            self.pos += len;
            let name = std::str::from_utf8(&rest[..len]).expect("ascii");
            return match name {
                "sqrt" => {
                    if !self.eat(b'(') {
                        return Err("sqrt needs `(`".into());
                    }
                    let v = self.sum()?;
                    if !self.eat(b')') {
                        return Err("missing `)`".into());
                    }
                    Ok(v.sqrt())
                }
                "pi" => Ok(std::f64::consts::PI),
                "kbar" => self.kbar.ok_or_else(|| "`kbar` is not available here".to_string()),
                _ => Err(format!("unknown name `{name}`")),
            };
        }
        let mut len = 0;
        while len < rest.len() {
            let c = rest[len];
            let exponent_sign = (c == b'+' || c == b'-') && len > 0 && matches!(rest[len - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exponent_sign {
                len += 1;
            } else {
                break;
            }
        }
        if len == 0 {
            return Err(format!("expected a number at offset {start}"));
        }
        self.pos += len;
        let text = std::str::from_utf8(&rest[..len]).expect("ascii");
        text.parse::<f64>().map_err(|_| format!("bad number `{text}`"))
    }
}
