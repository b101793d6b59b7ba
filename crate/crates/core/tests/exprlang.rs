use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use r13fem::cases::PUMP_THETA;
use r13fem::exprlang::{parse, EvalError, Expr};

/// Direct evaluator over the text, written from the grammar alone.
struct Reference<'a> {
    s: &'a [u8],
    i: usize,
    x: f64,
    y: f64,
}

#[derive(Debug, PartialEq)]
enum RefError {
    Syntax,
    Domain,
}

impl Reference<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<f64, RefError> {
        let mut v = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    v += self.term()?;
                }
                Some(b'-') => {
                    self.i += 1;
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, RefError> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') if self.s.get(self.i + 1) != Some(&b'*') => {
                    self.i += 1;
                    v *= self.unary()?;
                }
                Some(b'/') => {
                    self.i += 1;
                    let d = self.unary()?;
                    if d == 0.0 {
                        return Err(RefError::Domain);
                    }
                    v /= d;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, RefError> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<f64, RefError> {
        let base = self.primary()?;
        match self.peek() {
            Some(b'^') => {
                self.i += 1;
            }
            Some(b'*') if self.s.get(self.i + 1) == Some(&b'*') => {
                self.i += 2;
            }
            _ => return Ok(base),
        }
        Ok(base.powf(self.unary()?))
    }

    fn primary(&mut self) -> Result<f64, RefError> {
        match self.peek().ok_or(RefError::Syntax)? {
            b'(' => {
                self.i += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(RefError::Syntax);
                }
                self.i += 1;
                Ok(v)
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
                    self.i += 1;
                }
                std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().map_err(|_| RefError::Syntax)
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap().to_string();
                match name.as_str() {
                    "x" => return Ok(self.x),
                    "y" => return Ok(self.y),
                    "pi" => return Ok(std::f64::consts::PI),
                    _ => {}
                }
                if self.peek() != Some(b'(') {
                    return Err(RefError::Syntax);
                }
                self.i += 1;
                let mut args = vec![self.expr()?];
                while self.peek() == Some(b',') {
                    self.i += 1;
                    args.push(self.expr()?);
                }
                if self.peek() != Some(b')') {
                    return Err(RefError::Syntax);
                }
                self.i += 1;
                let a = args[0];
                Ok(match (name.as_str(), args.len()) {
                    ("sin", 1) => a.sin(),
                    ("cos", 1) => a.cos(),
                    ("tan", 1) => a.tan(),
                    ("sqrt", 1) => a.sqrt(),
                    ("exp", 1) => a.exp(),
                    ("log", 1) => a.ln(),
                    ("abs", 1) => a.abs(),
                    ("atan2", 2) => {
                        if a == 0.0 && args[1] == 0.0 {
                            return Err(RefError::Domain);
                        }
                        a.atan2(args[1])
                    }
                    _ => return Err(RefError::Syntax),
                })
            }
            _ => Err(RefError::Syntax),
        }
    }
}

fn reference(text: &str, x: f64, y: f64) -> Result<f64, RefError> {
    let mut r = Reference { s: text.as_bytes(), i: 0, x, y };
    let v = r.expr()?;
    if r.peek().is_some() {
        return Err(RefError::Syntax);
    }
    Ok(v)
}

fn space(rng: &mut ChaCha8Rng) -> &'static str {
    ["", "", " ", "  "][rng.gen_range(0..4)]
}

fn gen(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => "x".into(),
            1 => "y".into(),
            2 => "pi".into(),
            3 => format!("{}", rng.gen_range(0..20)),
            _ => format!("{}.{}", rng.gen_range(0..10), rng.gen_range(0..100)),
        };
    }
    let (a, b) = (gen(rng, depth - 1), gen(rng, depth - 1));
    let sp = space(rng);
    match rng.gen_range(0..11) {
        0 => format!("{a}{sp}+{sp}{b}"),
        1 => format!("{a}{sp}-{sp}{b}"),
        2 => format!("{a}{sp}*{sp}{b}"),
        3 => format!("{a}{sp}/{sp}{b}"),
        4 => format!("{a}{sp}^{sp}{b}"),
        5 => format!("{a}{sp}**{sp}{b}"),
        6 => format!("-{a}"),
        7 => format!("({a})"),
        8 => {
            let f = ["sin", "cos", "tan", "sqrt", "exp", "log", "abs"][rng.gen_range(0..7)];
            format!("{f}({sp}{a}{sp})")
        }
        9 => format!("atan2({a},{sp}{b})"),
        _ => format!("{a}{sp}*{sp}-{b}"),
    }
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

#[test]
fn parser_agrees_with_reference_evaluator() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    for _ in 0..1000 {
        let text = gen(&mut rng, 4);
        let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let e = parse(&text).unwrap_or_else(|err| panic!("{text}: {err}"));
        match (e.eval(x, y), reference(&text, x, y)) {
            (Ok(a), Ok(b)) => assert!(same(a, b), "{text}: {a} vs {b}"),
            (Err(_), Err(RefError::Domain)) => {}
            (a, b) => panic!("{text}: {a:?} vs {b:?}"),
        }
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn printing_is_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let text = gen(&mut rng, 4);
        let e = parse(&text).unwrap();
        let printed = e.to_string();
        let back = parse(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(back, e, "{text} -> {printed}");
        assert_eq!(back.to_string(), printed);
    }
}

#[test]
fn precedence_and_associativity() {
    let v = |s: &str| parse(s).unwrap().eval(0.0, 0.0).unwrap();
    assert_eq!(v("-2^2"), -4.0);
    assert_eq!(v("2^3^2"), 512.0);
    assert_eq!(v("2**3**2"), 512.0);
    assert_eq!(v("2^-1"), 0.5);
    assert_eq!(v("8 / 4 / 2"), 1.0);
    assert_eq!(v("1 - 2 - 3"), -4.0);
    assert_eq!(v("2 * 3 + 4"), 10.0);
    assert_eq!(v("2 * (3 + 4)"), 14.0);
    assert_eq!(v("-(1)^2 + +3"), 2.0);
    assert!((v("atan2(1, 1)") - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn syntax_errors_carry_offsets() {
    for (text, offset) in [("2 +", 3), ("sin(1", 5), ("foo(2)", 0), ("1 2", 2), ("(", 1), ("2 $ 3", 2)] {
        let err = parse(text).unwrap_err();
        assert_eq!(err.offset, offset, "{text}: {err}");
    }
    assert!(parse("atan2(1)").is_err());
    assert!(parse("sin(1, 2)").is_err());
    assert!(parse("").is_err());
}

#[test]
fn domain_errors_are_reported() {
    assert_eq!(parse("1 / (x - 1)").unwrap().eval(1.0, 0.0), Err(EvalError::DivisionByZero));
    assert_eq!(parse("atan2(y, x)").unwrap().eval(0.0, 0.0), Err(EvalError::Atan2Origin));
    assert!(parse("sqrt(-1)").unwrap().eval(0.0, 0.0).unwrap().is_nan());
}

#[test]
fn constants_are_detected() {
    assert!(parse("2 * pi + sin(1)").unwrap().is_constant());
    assert!(!parse("1 + 0 * x").unwrap().is_constant());
    assert_eq!("3".parse::<Expr>().unwrap(), Expr::constant(3.0));
}

#[test]
fn pump_wall_temperature_is_continuous_at_the_joints() {
    let theta: Vec<Expr> = PUMP_THETA.iter().map(|t| parse(t).unwrap()).collect();
    let at = |i: usize, p: [f64; 2]| theta[i].eval(p[0], p[1]).unwrap();
    for r in [0.5, 2.0] {
        // (arc tag, line tag, joint); tags 1..4 are indices 0..3.
        for (arc, line, p) in [(0, 1, [1.0, r]), (0, 3, [1.0, -r]), (2, 1, [-1.0, r]), (2, 3, [-1.0, -r])] {
            let (a, b) = (at(arc, p), at(line, p));
            assert!((a - b).abs() <= 1e-12, "r={r} {p:?}: {a} vs {b}");
        }
    }
    // Hot at (1, r), cold at (-1, r) along the upper line.
    assert!((at(1, [1.0, 0.5]) - 1.5).abs() < 1e-15 && (at(1, [-1.0, 0.5]) - 0.5).abs() < 1e-15);
}
