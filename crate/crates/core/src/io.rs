//! JSON file formats for games.
//!
//! ```json
//! {"type":"xor","S":["0","1"],"T":["0","1"],"pi":[[0.25,0.25],[0.25,0.25]],"f":[[0,0],[0,1]]}
//! {"type":"xor","cost":[[0.25,0.25],[0.25,-0.25]]}
//! {"type":"binary","S":[..],"T":[..],"A":2,"B":2,"pi":[[..]],"V":[[[[..]]]]}
//! ```
//!
//! `V` is indexed `[a][b][s][t]`. Every reader validates the game invariants.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{AnyGame, BinaryGame, XorGame};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum GameFile {
    Xor {
        #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
        s: Option<Vec<String>>,
        #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
        t: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pi: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<Vec<Vec<u8>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost: Option<Vec<Vec<f64>>>,
    },
    Binary {
        #[serde(rename = "S")]
        s: Vec<String>,
        #[serde(rename = "T")]
        t: Vec<String>,
        #[serde(rename = "A")]
        a: usize,
        #[serde(rename = "B")]
        b: usize,
        pi: Vec<Vec<f64>>,
        #[serde(rename = "V")]
        v: Vec<Vec<Vec<Vec<u8>>>>,
    },
}

pub(crate) fn matrix_from_rows<T>(rows: &[Vec<T>]) -> Result<DMatrix<T>>
where
    T: nalgebra::Scalar + Copy,
{
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn relabel(g: XorGame, s: Option<Vec<String>>, t: Option<Vec<String>>) -> Result<XorGame> {
    let s = s.unwrap_or_else(|| g.s_labels().to_vec());
    let t = t.unwrap_or_else(|| g.t_labels().to_vec());
    XorGame::with_labels(s, t, g.cost().clone())
}

pub fn game_from_json(text: &str) -> Result<AnyGame> {
    match serde_json::from_str::<GameFile>(text)? {
        GameFile::Xor { s, t, pi, f, cost } => {
            let game = match (pi, f, cost) {
                (Some(pi), Some(f), None) => {
                    XorGame::from_tables(&matrix_from_rows(&pi)?, &matrix_from_rows(&f)?)?
                }
                (None, None, Some(cost)) => XorGame::from_cost(matrix_from_rows(&cost)?)?,
                _ => {
                    return Err(Error::InvalidGame(
                        "xor game needs either `pi` and `f`, or `cost`".into(),
                    ))
                }
            };
            Ok(AnyGame::Xor(relabel(game, s, t)?))
        }
        GameFile::Binary { s, t, a, b, pi, v } => Ok(AnyGame::Binary(BinaryGame::new(
            s,
            t,
            a,
            b,
            matrix_from_rows(&pi)?,
            v,
        )?)),
    }
}

pub fn game_to_json(game: &AnyGame) -> String {
    let file = match game {
        AnyGame::Xor(g) => GameFile::Xor {
            s: Some(g.s_labels().to_vec()),
            t: Some(g.t_labels().to_vec()),
            pi: Some(matrix_to_rows(&g.distribution())),
            f: Some(matrix_to_rows(&g.predicate())),
            cost: None,
        },
        AnyGame::Binary(g) => GameFile::Binary {
            s: g.s_labels().to_vec(),
            t: g.t_labels().to_vec(),
            a: g.a_arity(),
            b: g.b_arity(),
            pi: matrix_to_rows(g.pi()),
            v: g.predicate_table(),
        },
    };
    serde_json::to_string_pretty(&file).expect("game serializes")
}

pub fn read_game(path: impl AsRef<Path>) -> Result<AnyGame> {
    game_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_game(path: impl AsRef<Path>, game: &AnyGame) -> Result<()> {
    std::fs::write(path, game_to_json(game))?;
    Ok(())
}
