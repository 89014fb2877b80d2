//! OpenQASM 2.0 subset: parsing and emission.
//!
//! Supported input: the `OPENQASM 2.0;` header, `include`, `qreg`/`creg`,
//! the gate set `h x y z s sdg t tdg rx ry rz p u1 u2 u3 cx cz cp cu1 ccx
//! swap`, and `measure`/`barrier` statements (ignored with a warning).
//! Gate parameters are arithmetic expressions over numbers and `pi`.
//! Classical control and gate definitions are outside the subset.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A non-fatal condition encountered while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

/// Parses a QASM program, logging warnings through [`log::warn`].
pub fn parse_qasm<T: Real>(text: &str) -> Result<Circuit<T>> {
    let (circuit, warnings) = parse_qasm_with_warnings(text)?;
    for w in &warnings {
        log::warn!("qasm line {}: {}", w.line, w.message);
    }
    Ok(circuit)
}

/// Parses a QASM program, returning ignored-statement warnings alongside
/// the circuit.
pub fn parse_qasm_with_warnings<T: Real>(text: &str) -> Result<(Circuit<T>, Vec<ParseWarning>)> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
        warnings: Vec::new(),
    }
    .parse_program()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
}

struct Lexed {
    tok: Tok,
    line: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    while let Some(&ch) = chars.peek() {
        match ch {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' => {
                chars.next();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        chars.next();
                    }
                } else {
                    out.push(Lexed {
                        tok: Tok::Slash,
                        line,
                    });
                }
            }
            '-' => {
                chars.next();
                if chars.peek() == Some(&'>') {
                    chars.next();
                    out.push(Lexed {
                        tok: Tok::Arrow,
                        line,
                    });
                } else {
                    out.push(Lexed {
                        tok: Tok::Minus,
                        line,
                    });
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(Error::Parse {
                                line,
                                message: "unterminated string literal".into(),
                            })
                        }
                        Some(c) => s.push(c),
                    }
                }
                out.push(Lexed {
                    tok: Tok::Str(s),
                    line,
                });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                        s.push(c);
                        chars.next();
                        // exponent sign
                        if (c == 'e' || c == 'E')
                            && matches!(chars.peek(), Some('+') | Some('-'))
                        {
                            s.push(chars.next().unwrap());
                        }
                    } else {
                        break;
                    }
                }
                let value: f64 = s.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad numeric literal '{s}'"),
                })?;
                out.push(Lexed {
                    tok: Tok::Number(value),
                    line,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Lexed {
                    tok: Tok::Ident(s),
                    line,
                });
            }
            _ => {
                chars.next();
                let tok = match ch {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    other => {
                        return Err(Error::Parse {
                            line,
                            message: format!("unexpected character '{other}'"),
                        })
                    }
                };
                out.push(Lexed { tok, line });
            }
        }
    }
    Ok(out)
}

struct Reg {
    name: String,
    offset: usize,
    size: usize,
}

struct Parser {
    tokens: Vec<Lexed>,
    pos: usize,
    warnings: Vec<ParseWarning>,
}

/// One parsed qubit argument: a single wire or a whole register.
enum QubitArg {
    One(usize),
    Whole { offset: usize, size: usize },
}

impl Parser {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map_or(0, |t| t.line)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected {what}")))
            }
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.err(format!("expected {what}")))
            }
        }
    }

    fn parse_program<T: Real>(mut self) -> Result<(Circuit<T>, Vec<ParseWarning>)> {
        // OPENQASM 2.0 ;
        let kw = self.expect_ident("'OPENQASM' header")?;
        if kw != "OPENQASM" {
            return Err(self.err("file must start with 'OPENQASM 2.0;'"));
        }
        match self.next() {
            Some(Tok::Number(2.0)) => {}
            _ => return Err(self.err("only OpenQASM version 2.0 is supported")),
        }
        self.expect(Tok::Semi, "';' after version")?;

        let mut regs: Vec<Reg> = Vec::new();
        let mut gates: Vec<Gate<T>> = Vec::new();

        while let Some(tok) = self.peek() {
            match tok {
                Tok::Ident(name) => {
                    let name = name.clone();
                    match name.as_str() {
                        "include" => {
                            self.next();
                            let file = match self.next() {
                                Some(Tok::Str(s)) => s,
                                _ => return Err(self.err("expected include file name")),
                            };
                            if file != "qelib1.inc" {
                                self.warn(format!("include '{file}' ignored"));
                            }
                            self.expect(Tok::Semi, "';' after include")?;
                        }
                        "qreg" | "creg" => {
                            self.next();
                            let reg_name = self.expect_ident("register name")?;
                            self.expect(Tok::LBracket, "'['")?;
                            let size = match self.next() {
                                Some(Tok::Number(v)) if v.fract() == 0.0 && v >= 1.0 => v as usize,
                                _ => return Err(self.err("register size must be a positive integer")),
                            };
                            self.expect(Tok::RBracket, "']'")?;
                            self.expect(Tok::Semi, "';' after register declaration")?;
                            if name == "qreg" {
                                if regs.iter().any(|r| r.name == reg_name) {
                                    return Err(self.err(format!(
                                        "register '{reg_name}' declared twice"
                                    )));
                                }
                                let offset = regs.iter().map(|r| r.size).sum();
                                regs.push(Reg {
                                    name: reg_name,
                                    offset,
                                    size,
                                });
                            }
                        }
                        "barrier" => {
                            let line = self.line();
                            self.skip_statement();
                            self.warnings.push(ParseWarning {
                                line,
                                message: "barrier ignored".into(),
                            });
                        }
                        "measure" => {
                            let line = self.line();
                            self.skip_statement();
                            self.warnings.push(ParseWarning {
                                line,
                                message: "measure ignored".into(),
                            });
                        }
                        "gate" | "opaque" | "if" | "reset" => {
                            return Err(self.err(format!(
                                "'{name}' statements are outside the supported subset"
                            )));
                        }
                        _ => {
                            self.parse_gate_call(&name, &regs, &mut gates)?;
                        }
                    }
                }
                _ => return Err(self.err("expected a statement")),
            }
        }
        let n: usize = regs.iter().map(|r| r.size).sum();
        if n == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "no qreg declared".into(),
            });
        }
        let circuit = Circuit::with_gates(n, "qasm", gates)?;
        Ok((circuit, self.warnings))
    }

    fn warn(&mut self, message: String) {
        let line = self.line();
        self.warnings.push(ParseWarning { line, message });
    }

    fn skip_statement(&mut self) {
        while let Some(tok) = self.next() {
            if tok == Tok::Semi {
                break;
            }
        }
    }

    fn parse_gate_call<T: Real>(
        &mut self,
        name: &str,
        regs: &[Reg],
        gates: &mut Vec<Gate<T>>,
    ) -> Result<()> {
        let line = self.line();
        self.next(); // consume the gate name
        let spec = gate_spec(name).ok_or(Error::UnsupportedGate {
            name: name.to_string(),
            line,
        })?;

        let mut params = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            loop {
                params.push(self.parse_expr()?);
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => return Err(self.err("expected ',' or ')' in parameter list")),
                }
            }
        }
        if params.len() != spec.params {
            return Err(self.err(format!(
                "gate '{name}' takes {} parameter(s), got {}",
                spec.params,
                params.len()
            )));
        }

        let mut args = Vec::new();
        loop {
            args.push(self.parse_qubit_arg(regs)?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Semi) => break,
                _ => return Err(self.err("expected ',' or ';' in qubit list")),
            }
        }
        if args.len() != spec.qubits {
            return Err(self.err(format!(
                "gate '{name}' takes {} qubit(s), got {}",
                spec.qubits,
                args.len()
            )));
        }

        // Whole-register broadcast is allowed for single-qubit gates only.
        if args.iter().any(|a| matches!(a, QubitArg::Whole { .. })) {
            if spec.qubits != 1 {
                return Err(self.err(format!(
                    "whole-register argument not supported for multi-qubit gate '{name}'"
                )));
            }
            if let QubitArg::Whole { offset, size } = args[0] {
                for q in offset..offset + size {
                    gates.push((spec.build)(&params, &[q]));
                }
            }
            return Ok(());
        }
        let wires: Vec<usize> = args
            .iter()
            .map(|a| match a {
                QubitArg::One(q) => *q,
                QubitArg::Whole { .. } => unreachable!(),
            })
            .collect();
        gates.push((spec.build)(&params, &wires));
        Ok(())
    }

    fn parse_qubit_arg(&mut self, regs: &[Reg]) -> Result<QubitArg> {
        let name = self.expect_ident("qubit argument")?;
        let reg = regs
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| self.err(format!("unknown register '{name}'")))?;
        if self.peek() == Some(&Tok::LBracket) {
            self.next();
            let idx = match self.next() {
                Some(Tok::Number(v)) if v.fract() == 0.0 && v >= 0.0 => v as usize,
                _ => return Err(self.err("qubit index must be a nonnegative integer")),
            };
            self.expect(Tok::RBracket, "']'")?;
            if idx >= reg.size {
                return Err(self.err(format!(
                    "index {idx} out of range for register '{name}[{}]'",
                    reg.size
                )));
            }
            Ok(QubitArg::One(reg.offset + idx))
        } else {
            Ok(QubitArg::Whole {
                offset: reg.offset,
                size: reg.size,
            })
        }
    }

    // expr := term (('+'|'-') term)*
    fn parse_expr(&mut self) -> Result<f64> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    acc += self.parse_term()?;
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc -= self.parse_term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn parse_term(&mut self) -> Result<f64> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    acc *= self.parse_factor()?;
                }
                Some(Tok::Slash) => {
                    self.next();
                    let d = self.parse_factor()?;
                    acc /= d;
                }
                _ => return Ok(acc),
            }
        }
    }

    // factor := '-' factor | number | 'pi' | '(' expr ')'
    fn parse_factor(&mut self) -> Result<f64> {
        match self.next() {
            Some(Tok::Minus) => Ok(-self.parse_factor()?),
            Some(Tok::Number(v)) => Ok(v),
            Some(Tok::Ident(s)) if s == "pi" => Ok(std::f64::consts::PI),
            Some(Tok::LParen) => {
                let v = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a numeric expression"))
            }
        }
    }
}

struct GateSpec<T> {
    params: usize,
    qubits: usize,
    build: fn(&[f64], &[usize]) -> Gate<T>,
}

fn gate_spec<T: Real>(name: &str) -> Option<GateSpec<T>> {
    let spec = |params, qubits, build| Some(GateSpec {
        params,
        qubits,
        build,
    });
    match name {
        "h" => spec(0, 1, |_, q| Gate::h(q[0])),
        "x" => spec(0, 1, |_, q| Gate::x(q[0])),
        "y" => spec(0, 1, |_, q| Gate::y(q[0])),
        "z" => spec(0, 1, |_, q| Gate::z(q[0])),
        "s" => spec(0, 1, |_, q| Gate::new(GateKind::S, vec![q[0]], vec![])),
        "sdg" => spec(0, 1, |_, q| Gate::new(GateKind::Sdg, vec![q[0]], vec![])),
        "t" => spec(0, 1, |_, q| Gate::new(GateKind::T, vec![q[0]], vec![])),
        "tdg" => spec(0, 1, |_, q| Gate::new(GateKind::Tdg, vec![q[0]], vec![])),
        "rx" => spec(1, 1, |p, q| Gate::rx(T::of(p[0]), q[0])),
        "ry" => spec(1, 1, |p, q| Gate::ry(T::of(p[0]), q[0])),
        "rz" => spec(1, 1, |p, q| Gate::rz(T::of(p[0]), q[0])),
        "p" | "u1" => spec(1, 1, |p, q| Gate::phase(T::of(p[0]), q[0])),
        "u2" => spec(2, 1, |p, q| {
            Gate::new(
                GateKind::U3(T::FRAC_PI_2(), T::of(p[0]), T::of(p[1])),
                vec![q[0]],
                vec![],
            )
        }),
        "u3" | "u" | "U" => spec(3, 1, |p, q| {
            Gate::new(
                GateKind::U3(T::of(p[0]), T::of(p[1]), T::of(p[2])),
                vec![q[0]],
                vec![],
            )
        }),
        "cx" | "CX" => spec(0, 2, |_, q| Gate::cx(q[0], q[1])),
        "cz" => spec(0, 2, |_, q| Gate::cz(q[0], q[1])),
        "cp" | "cu1" => spec(1, 2, |p, q| Gate::cp(T::of(p[0]), q[0], q[1])),
        "ccx" => spec(0, 3, |_, q| Gate::ccx(q[0], q[1], q[2])),
        "swap" => spec(0, 2, |_, q| Gate::swap(q[0], q[1])),
        _ => None,
    }
}

/// Renders a circuit as OpenQASM 2.0. Only gates inside the subset are
/// emittable; semantic gates (diagonal callbacks, permutations, phase-flip
/// oracles) and unsupported control patterns are rejected.
pub fn emit_qasm<T: Real>(circuit: &Circuit<T>) -> Result<String> {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "OPENQASM 2.0;");
    let _ = writeln!(out, "include \"qelib1.inc\";");
    let _ = writeln!(out, "qreg q[{}];", circuit.qubits());
    for gate in circuit.gates() {
        let t = gate.targets[0];
        let unsupported = || {
            Error::domain(format!(
                "gate {:?} with {} control(s) has no QASM form in the supported subset",
                gate.kind,
                gate.controls.len()
            ))
        };
        let line = match (&gate.kind, gate.controls.as_slice()) {
            (GateKind::H, []) => format!("h q[{t}];"),
            (GateKind::X, []) => format!("x q[{t}];"),
            (GateKind::X, [c]) => format!("cx q[{c}],q[{t}];"),
            (GateKind::X, [c1, c2]) => format!("ccx q[{c1}],q[{c2}],q[{t}];"),
            (GateKind::Y, []) => format!("y q[{t}];"),
            (GateKind::Z, []) => format!("z q[{t}];"),
            (GateKind::Z, [c]) => format!("cz q[{c}],q[{t}];"),
            (GateKind::S, []) => format!("s q[{t}];"),
            (GateKind::Sdg, []) => format!("sdg q[{t}];"),
            (GateKind::T, []) => format!("t q[{t}];"),
            (GateKind::Tdg, []) => format!("tdg q[{t}];"),
            (GateKind::Rx(a), []) => format!("rx({a}) q[{t}];"),
            (GateKind::Ry(a), []) => format!("ry({a}) q[{t}];"),
            (GateKind::Rz(a), []) => format!("rz({a}) q[{t}];"),
            (GateKind::Phase(a), []) => format!("p({a}) q[{t}];"),
            (GateKind::Phase(a), [c]) => format!("cp({a}) q[{c}],q[{t}];"),
            (GateKind::U3(a, b, c0), []) => format!("u3({a},{b},{c0}) q[{t}];"),
            (GateKind::Swap, []) => {
                format!("swap q[{}],q[{}];", gate.targets[0], gate.targets[1])
            }
            _ => return Err(unsupported()),
        };
        let _ = writeln!(out, "{line}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::generators;
    use crate::dense::DenseState;

    const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

    #[test]
    fn parses_single_x() {
        let text = format!("{HEADER}qreg q[1];\nx q[0];\n");
        let circuit = parse_qasm::<f64>(&text).unwrap();
        assert_eq!(circuit.qubits(), 1);
        assert_eq!(circuit.len(), 1);
        assert_eq!(circuit.gates()[0], Gate::x(0));
    }

    #[test]
    fn parses_ghz_pair() {
        let text = format!("{HEADER}qreg q[2];\nh q[0];\ncx q[0],q[1];\n");
        let circuit = parse_qasm::<f64>(&text).unwrap();
        assert_eq!(circuit.len(), 2);
        let out = circuit
            .apply_dense(&DenseState::basis(2, 0).unwrap())
            .unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((out.amplitude(0).unwrap().re - s).abs() < 1e-15);
        assert!((out.amplitude(3).unwrap().re - s).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_gate_with_line() {
        let text = format!("{HEADER}qreg q[2];\nrzz(0.1) q[0],q[1];\n");
        match parse_qasm::<f64>(&text) {
            Err(Error::UnsupportedGate { name, line }) => {
                assert_eq!(name, "rzz");
                assert_eq!(line, 4);
            }
            other => panic!("expected UnsupportedGate, got {other:?}"),
        }
    }

    #[test]
    fn ignores_measure_and_barrier_with_warnings() {
        let text = format!(
            "{HEADER}qreg q[2];\ncreg c[2];\nh q[0];\nbarrier q;\nmeasure q[0] -> c[0];\n"
        );
        let (circuit, warnings) = parse_qasm_with_warnings::<f64>(&text).unwrap();
        assert_eq!(circuit.len(), 1);
        assert_eq!(warnings.len(), 2);
        assert!(warnings[0].message.contains("barrier"));
        assert!(warnings[1].message.contains("measure"));
    }

    #[test]
    fn evaluates_angle_expressions() {
        let text = format!(
            "{HEADER}qreg q[1];\nrx(pi/2) q[0];\nrz(-3*pi/4) q[0];\nu3(0.5, -(2+1)/4, 1e-2) q[0];\n"
        );
        let circuit = parse_qasm::<f64>(&text).unwrap();
        let pi = std::f64::consts::PI;
        assert_eq!(circuit.gates()[0].kind, GateKind::Rx(pi / 2.0));
        assert_eq!(circuit.gates()[1].kind, GateKind::Rz(-3.0 * pi / 4.0));
        assert_eq!(circuit.gates()[2].kind, GateKind::U3(0.5, -0.75, 0.01));
    }

    #[test]
    fn broadcasts_single_qubit_gate_over_register() {
        let text = format!("{HEADER}qreg q[3];\nh q;\n");
        let circuit = parse_qasm::<f64>(&text).unwrap();
        assert_eq!(circuit.len(), 3);
        let text = format!("{HEADER}qreg q[3];\ncx q,q;\n");
        assert!(parse_qasm::<f64>(&text).is_err());
    }

    #[test]
    fn maps_multiple_registers_to_flat_indices() {
        let text = format!("{HEADER}qreg a[2];\nqreg b[2];\ncx a[1],b[0];\n");
        let circuit = parse_qasm::<f64>(&text).unwrap();
        assert_eq!(circuit.qubits(), 4);
        assert_eq!(circuit.gates()[0], Gate::cx(1, 2));
    }

    #[test]
    fn reports_parse_errors_with_lines() {
        for (bad, needle) in [
            ("qreg q[1]\nx q[0];\n", "expected"),
            ("qreg q[1];\nx q[3];\n", "out of range"),
            ("qreg q[1];\nx r[0];\n", "unknown register"),
            ("qreg q[0];\n", "positive"),
        ] {
            let text = format!("{HEADER}{bad}");
            match parse_qasm::<f64>(&text) {
                Err(Error::Parse { message, .. }) => {
                    assert!(
                        message.contains(needle),
                        "message '{message}' missing '{needle}'"
                    );
                }
                other => panic!("expected parse error for {bad:?}, got {other:?}"),
            }
        }
        // Missing header entirely.
        assert!(parse_qasm::<f64>("qreg q[1];").is_err());
    }

    #[test]
    fn emit_parse_round_trip_preserves_families() {
        for circuit in [
            generators::ghz_circuit::<f64>(5).unwrap(),
            generators::qft_circuit::<f64>(4).unwrap(),
            generators::dj_circuit::<f64>(4).unwrap(),
            generators::w_state_circuit::<f64>(4).unwrap(),
        ] {
            let text = emit_qasm(&circuit).unwrap();
            let reparsed = parse_qasm::<f64>(&text).unwrap();
            assert_eq!(reparsed.qubits(), circuit.qubits());
            assert_eq!(reparsed.gates(), circuit.gates(), "{}", circuit.name());
        }
    }

    #[test]
    fn semantic_gates_are_not_emittable() {
        let marked = std::collections::BTreeSet::from([1u64]);
        let circuit = generators::grover_circuit::<f64>(3, &marked).unwrap();
        assert!(emit_qasm(&circuit).is_err());
        // The elementary construction is emittable and round-trips.
        let circuit = generators::grover_circuit_elementary::<f64>(3, &marked).unwrap();
        let text = emit_qasm(&circuit).unwrap();
        let reparsed = parse_qasm::<f64>(&text).unwrap();
        assert_eq!(reparsed.gates(), circuit.gates());
    }
}
