//! Towers of forms with strictly increasing layer degrees.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Form;
use crate::text::{content_lines, max_variable, parse_form_at};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Layer {
    pub degree: u32,
    pub forms: Vec<Form>,
}

/// Layers `F_1, ..., F_h` bottom-up. Layer degrees strictly increase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tower {
    field: Field,
    nvars: usize,
    layers: Vec<Layer>,
}

impl Tower {
    pub fn new(field: Field, nvars: usize) -> Tower {
        Tower {
            field,
            nvars,
            layers: Vec::new(),
        }
    }

    /// Groups forms by degree into layers. Forms of one degree keep their order.
    pub fn from_forms(field: Field, nvars: usize, forms: &[Form]) -> Result<Tower> {
        let mut t = Tower::new(field, nvars);
        for f in forms {
            t.insert(f.clone())?;
        }
        Ok(t)
    }

    pub fn from_layers(field: Field, nvars: usize, layers: Vec<Layer>) -> Result<Tower> {
        let mut t = Tower::new(field, nvars);
        for l in layers {
            t.push_layer(l.degree, l.forms)?;
        }
        Ok(t)
    }

    fn check(&self, f: &Form) -> Result<()> {
        if f.field() != self.field {
            return Err(Error::FieldMismatch);
        }
        if f.nvars() != self.nvars {
            return Err(Error::AmbientMismatch(self.nvars, f.nvars()));
        }
        Ok(())
    }

    /// Appends a top layer. Its degree must exceed every existing degree.
    pub fn push_layer(&mut self, degree: u32, forms: Vec<Form>) -> Result<()> {
        if let Some(top) = self.layers.last() {
            if degree <= top.degree {
                return Err(Error::invalid("layer degrees must strictly increase"));
            }
        }
        for f in &forms {
            self.check(f)?;
            if f.degree() != degree {
                return Err(Error::DegreeMismatch(degree, f.degree()));
            }
        }
        self.layers.push(Layer { degree, forms });
        Ok(())
    }

    /// Adds `f` to the layer of its degree, creating the layer if needed.
    pub fn insert(&mut self, f: Form) -> Result<()> {
        self.check(&f)?;
        let d = f.degree();
        match self.layers.binary_search_by_key(&d, |l| l.degree) {
            Ok(i) => self.layers[i].forms.push(f),
            Err(i) => self.layers.insert(
                i,
                Layer {
                    degree: d,
                    forms: vec![f],
                },
            ),
        }
        Ok(())
    }

    /// Removes form `j` of layer `i`, dropping the layer when it empties.
    pub fn remove(&mut self, i: usize, j: usize) -> Form {
        let f = self.layers[i].forms.remove(j);
        if self.layers[i].forms.is_empty() {
            self.layers.remove(i);
        }
        f
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn height(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Total number of forms.
    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.forms.len()).sum()
    }

    /// `s_i + ... + s_h` for the 0-based layer `i`.
    pub fn size_from(&self, i: usize) -> usize {
        self.layers[i..].iter().map(|l| l.forms.len()).sum()
    }

    /// The forms of the layers below `i`.
    pub fn below(&self, i: usize) -> Vec<Form> {
        self.layers[..i].iter().flat_map(|l| l.forms.iter().cloned()).collect()
    }

    pub fn forms(&self) -> Vec<Form> {
        self.below(self.layers.len())
    }

    pub fn max_degree(&self) -> u32 {
        self.layers.last().map_or(0, |l| l.degree)
    }

    /// Reads `layer <degree>` headers, each followed by one form per line.
    /// An optional leading `vars <n>` line fixes the ambient dimension.
    pub fn parse(src: &str, field: Field) -> Result<Tower> {
        let mut nvars: Option<usize> = None;
        let mut blocks: Vec<(usize, u32, Vec<(usize, String)>)> = Vec::new();
        for (line, text) in content_lines(src) {
            if let Some(rest) = text.strip_prefix("vars ") {
                nvars = Some(
                    rest.trim()
                        .parse()
                        .map_err(|_| Error::parse(line, 6, "bad variable count"))?,
                );
            } else if let Some(rest) = text.strip_prefix("layer") {
                let d: u32 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, 7, "expected `layer <degree>`"))?;
                blocks.push((line, d, Vec::new()));
            } else {
                let b = blocks
                    .last_mut()
                    .ok_or_else(|| Error::parse(line, 1, "form before any `layer` header"))?;
                b.2.push((line, text.to_string()));
            }
        }
        let n = nvars.unwrap_or_else(|| {
            blocks
                .iter()
                .flat_map(|b| b.2.iter().map(|(_, s)| max_variable(s)))
                .max()
                .unwrap_or(0)
        });
        let mut t = Tower::new(field, n);
        for (line, d, rows) in blocks {
            let mut forms = Vec::new();
            for (l, s) in rows {
                let f = parse_form_at(&s, field, n, l)?;
                if f.degree() != d {
                    return Err(Error::parse(
                        l,
                        1,
                        format!("form of degree {} in layer of degree {d}", f.degree()),
                    ));
                }
                forms.push(f);
            }
            t.push_layer(d, forms)
                .map_err(|e| Error::parse(line, 1, e.to_string()))?;
        }
        Ok(t)
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.nvars)?;
        for l in &self.layers {
            writeln!(f, "layer {}", l.degree)?;
            for form in &l.forms {
                writeln!(f, "{form}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let t = Tower::parse("layer 1\nx1\nlayer 2\nx1*x2 + x3^2\n", Field::Rational).unwrap();
        assert_eq!(t.nvars(), 3);
        assert_eq!(t.size(), 2);
        assert_eq!(Tower::parse(&t.to_string(), Field::Rational).unwrap(), t);
    }

    #[test]
    fn rejects_bad_layers() {
        assert!(Tower::parse("layer 2\nx1\n", Field::Rational).is_err());
        assert!(Tower::parse("layer 2\nx1^2\nlayer 1\nx1\n", Field::Rational).is_err());
        assert!(Tower::parse("x1\n", Field::Rational).is_err());
    }

    #[test]
    fn insert_keeps_degrees_sorted() {
        let q = Field::Rational;
        let mut t = Tower::new(q, 2);
        t.insert(Form::var(q, 2, 0).mul(&Form::var(q, 2, 1)).unwrap()).unwrap();
        t.insert(Form::var(q, 2, 0)).unwrap();
        assert_eq!(t.layers()[0].degree, 1);
        t.remove(0, 0);
        assert_eq!(t.height(), 1);
    }
}
