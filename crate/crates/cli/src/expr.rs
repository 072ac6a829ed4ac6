//! Graph construction expressions.
//!
//! ```text
//! graph := NAME                       built-in graph
//!        | @PATH                      graph file
//!        | minkowski(graph, graph)
//!        | union(graph, graph)
//!        | rotate(rot, graph)
//!        | filter(graph, RSQ[, le|gt])   keep |p|² ≤ RSQ (default) or > RSQ
//!        | import(PATH)               plain coordinate list
//! rot   := factor ('*' factor)*
//! factor:= id | theta<i>[^<n>] | theta<i>^<n>/2
//! ```

use std::path::Path;

use cnp_core::exactnum::FieldContext;
use cnp_core::geometry::{Exponent, Rotation};
use cnp_core::graphio::{import_graph, parse_expr, read_graph};
use cnp_core::udgraph::{builtin, filter_radius, minkowski, rotate_graph, union, UnitDistanceGraph};

use crate::error::CliError;

pub fn eval(ctx: &FieldContext, src: &str) -> Result<UnitDistanceGraph, CliError> {
    let src = src.trim();
    if let Some(path) = src.strip_prefix('@') {
        let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        return Ok(read_graph(std::io::BufReader::new(f))?);
    }
    let Some(open) = src.find('(') else {
        return Ok(builtin::by_name(src, ctx)?);
    };
    if !src.ends_with(')') {
        return Err(CliError::parse(format!("unbalanced parentheses in {src:?}")));
    }
    let head = src[..open].trim();
    let args = split_args(&src[open + 1..src.len() - 1])?;
    let arity = |n: std::ops::RangeInclusive<usize>| {
        if n.contains(&args.len()) {
            Ok(())
        } else {
            Err(CliError::parse(format!("{head} takes {n:?} arguments, got {}", args.len())))
        }
    };
    match head {
        "minkowski" => {
            arity(2..=2)?;
            Ok(minkowski(&eval(ctx, args[0])?, &eval(ctx, args[1])?)?)
        }
        "union" => {
            arity(2..=2)?;
            Ok(union(&eval(ctx, args[0])?, &eval(ctx, args[1])?)?)
        }
        "rotate" => {
            arity(2..=2)?;
            Ok(rotate_graph(&eval(ctx, args[1])?, &rotation(ctx, args[0])?)?)
        }
        "filter" => {
            arity(2..=3)?;
            let keep_leq = match args.get(2).map(|s| s.trim()) {
                None | Some("le") => true,
                Some("gt") => false,
                Some(other) => return Err(CliError::parse(format!("filter mode must be le or gt, got {other:?}"))),
            };
            let g = eval(ctx, args[0])?;
            let rsq = parse_expr(g.context(), args[1])?;
            Ok(filter_radius(&g, &rsq, keep_leq))
        }
        "import" => {
            arity(1..=1)?;
            let path = args[0].trim();
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Ok(import_graph(ctx, &text)?)
        }
        other => Err(CliError::parse(format!("unknown operator {other:?}"))),
    }
}

/// Splits on top-level commas.
fn split_args(s: &str) -> Result<Vec<&str>, CliError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(CliError::parse("unbalanced parentheses"));
                }
            }
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(CliError::parse("unbalanced parentheses"));
    }
    if !s.trim().is_empty() {
        out.push(s[start..].trim());
    }
    Ok(out)
}

pub fn rotation(ctx: &FieldContext, src: &str) -> Result<Rotation, CliError> {
    let mut acc = Rotation::identity(ctx);
    for factor in src.split('*') {
        let f = factor.trim();
        if f == "id" {
            continue;
        }
        let rest = f
            .strip_prefix("theta")
            .ok_or_else(|| CliError::parse(format!("bad rotation {f:?}")))?;
        let (index, power) = rest.split_once('^').unwrap_or((rest, "1"));
        let i: u32 = index
            .parse()
            .ok()
            .filter(|&i| i > 0)
            .ok_or_else(|| CliError::parse(format!("bad theta index in {f:?}")))?;
        let exp = match power.split_once('/') {
            Some((n, "2")) => Exponent::halves(n.parse().map_err(|_| CliError::parse(format!("bad exponent in {f:?}")))?),
            Some(_) => return Err(CliError::parse(format!("only halves are supported in {f:?}"))),
            None => Exponent::int(power.parse().map_err(|_| CliError::parse(format!("bad exponent in {f:?}")))?),
        };
        acc = acc.then(&Rotation::theta(i, ctx)?.power(exp)?);
    }
    Ok(acc)
}

/// Reads a graph from a path, `-` for standard input, or an expression
/// when the argument is not an existing file.
pub fn load_graph(ctx: &FieldContext, arg: &str) -> Result<UnitDistanceGraph, CliError> {
    if arg == "-" {
        return Ok(read_graph(std::io::stdin().lock())?);
    }
    if Path::new(arg).is_file() {
        return eval(ctx, &format!("@{arg}"));
    }
    eval(ctx, arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_and_operators() {
        let c = FieldContext::standard();
        assert_eq!(eval(&c, "moser").unwrap().num_vertices(), 7);
        let g = eval(&c, "union(rhombus, rotate(theta3, rhombus))").unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (7, 11));
        let g = eval(&c, "filter(minkowski(v31, v31), 1)").unwrap();
        assert_eq!(g.num_vertices(), 151);
        let all = eval(&c, "minkowski(v31, v31)").unwrap().num_vertices();
        let outer = eval(&c, "filter(minkowski(v31, v31), 1, gt)").unwrap();
        assert_eq!(outer.num_vertices(), all - 151);
    }

    #[test]
    fn rotations() {
        let c = FieldContext::standard();
        let a = rotation(&c, "theta3^1/2 * theta3^1/2").unwrap();
        let b = rotation(&c, "theta3").unwrap();
        assert_eq!(a.cos(), b.cos());
        assert!(rotation(&c, "theta1^-6").unwrap().is_identity());
        assert!(rotation(&c, "phi2").is_err());
        assert!(rotation(&c, "theta0").is_err());
    }

    #[test]
    fn malformed() {
        let c = FieldContext::standard();
        assert!(eval(&c, "union(moser").is_err());
        assert!(eval(&c, "union(moser)").is_err());
        assert!(eval(&c, "nosuch").is_err());
        assert!(eval(&c, "frob(moser, moser)").is_err());
    }
}
