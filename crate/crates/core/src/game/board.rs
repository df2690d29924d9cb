use crate::error::{Error, Result};

use super::{not_terminal, Game, Payoff, Player, StateKey};

const EMPTY: u8 = 0;

/// k-in-a-row on a `cols x rows` grid, optionally with gravity.
///
/// Cells are stored row-major; with gravity row 0 is the bottom row.
#[derive(Clone, Debug)]
struct Grid {
    cols: usize,
    rows: usize,
    k: usize,
    gravity: bool,
    lines: Vec<Vec<usize>>,
}

impl Grid {
    fn new(cols: usize, rows: usize, k: usize, gravity: bool) -> Result<Self> {
        if cols == 0 || rows == 0 || k == 0 {
            return Err(Error::Configuration(
                "board dimensions and k must be positive".into(),
            ));
        }
        if cols * rows > 64 {
            return Err(Error::Configuration(
                "boards are limited to 64 cells".into(),
            ));
        }
        let mut lines = Vec::new();
        let dirs: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];
        for r in 0..rows as isize {
            for c in 0..cols as isize {
                for (dc, dr) in dirs {
                    let end_c = c + dc * (k as isize - 1);
                    let end_r = r + dr * (k as isize - 1);
                    if end_c < 0 || end_c >= cols as isize || end_r < 0 || end_r >= rows as isize {
                        continue;
                    }
                    let line = (0..k as isize)
                        .map(|i| ((r + dr * i) * cols as isize + c + dc * i) as usize)
                        .collect();
                    lines.push(line);
                }
            }
        }
        // k = 1 produces the same single-cell line in every direction.
        lines.sort();
        lines.dedup();
        Ok(Grid {
            cols,
            rows,
            k,
            gravity,
            lines,
        })
    }

    fn cells(&self) -> usize {
        self.cols * self.rows
    }

    fn decode<'a>(&self, s: &'a StateKey) -> Result<(&'a [u8], Player)> {
        let b = s.as_bytes();
        if b.len() != self.cells() {
            return Err(Error::malformed(
                s,
                format!("expected {} cells", self.cells()),
            ));
        }
        let mut ones = 0usize;
        let mut twos = 0usize;
        for &cell in b {
            match cell {
                0 => {}
                1 => ones += 1,
                2 => twos += 1,
                _ => return Err(Error::malformed(s, "cell values must be 0, 1 or 2")),
            }
        }
        let mover = match ones.checked_sub(twos) {
            Some(0) => Player::One,
            Some(1) => Player::Two,
            _ => return Err(Error::malformed(s, "mark counts are inconsistent")),
        };
        if self.gravity {
            for c in 0..self.cols {
                let mut seen_empty = false;
                for r in 0..self.rows {
                    let filled = b[r * self.cols + c] != EMPTY;
                    if filled && seen_empty {
                        return Err(Error::malformed(s, "floating piece"));
                    }
                    seen_empty |= !filled;
                }
            }
        }
        Ok((b, mover))
    }

    fn winner(&self, cells: &[u8]) -> Option<Player> {
        self.lines.iter().find_map(|line| {
            let first = cells[line[0]];
            if first != EMPTY && line.iter().all(|&i| cells[i] == first) {
                Player::from_number(first)
            } else {
                None
            }
        })
    }

    fn terminal(&self, cells: &[u8]) -> bool {
        self.winner(cells).is_some() || cells.iter().all(|&c| c != EMPTY)
    }

    fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>> {
        let (cells, mover) = self.decode(s)?;
        if self.terminal(cells) {
            return Ok(Vec::new());
        }
        let mark = mover.number();
        let place = |i: usize| {
            let mut next = cells.to_vec();
            next[i] = mark;
            StateKey::new(next)
        };
        if self.gravity {
            Ok((0..self.cols)
                .filter_map(|c| {
                    (0..self.rows)
                        .map(|r| r * self.cols + c)
                        .find(|&i| cells[i] == EMPTY)
                        .map(place)
                })
                .collect())
        } else {
            Ok((0..cells.len())
                .filter(|&i| cells[i] == EMPTY)
                .map(place)
                .collect())
        }
    }

    fn payoff(&self, s: &StateKey) -> Result<Payoff> {
        let (cells, _) = self.decode(s)?;
        if !self.terminal(cells) {
            return Err(not_terminal(s));
        }
        Ok(self.winner(cells).map_or(Payoff::Draw, Payoff::won_by))
    }

    fn empty_cells(&self, s: &StateKey) -> Option<u32> {
        let (cells, _) = self.decode(s).ok()?;
        Some(cells.iter().filter(|&&c| c == EMPTY).count() as u32)
    }

    /// Lines still open for player 1 minus lines still open for player 2.
    fn material(&self, s: &StateKey) -> f64 {
        let Ok((cells, _)) = self.decode(s) else {
            return 0.0;
        };
        let open_for = |blocker: u8| {
            self.lines
                .iter()
                .filter(|line| line.iter().all(|&i| cells[i] != blocker))
                .count() as f64
        };
        (open_for(2) - open_for(1)) / (self.lines.len() as f64 + 1.0)
    }

    fn render(&self, s: &StateKey) -> String {
        let Ok((cells, mover)) = self.decode(s) else {
            return s.to_hex();
        };
        let mut out = String::new();
        let rows: Vec<usize> = if self.gravity {
            (0..self.rows).rev().collect()
        } else {
            (0..self.rows).collect()
        };
        for r in rows {
            for c in 0..self.cols {
                out.push(match cells[r * self.cols + c] {
                    1 => 'X',
                    2 => 'O',
                    _ => '.',
                });
            }
            out.push('\n');
        }
        out.push_str(&format!("player {} to move", mover.number()));
        out
    }
}

/// Classic 3x3 noughts and crosses; cells indexed 0..9 row-major.
#[derive(Clone, Debug)]
pub struct TicTacToe {
    grid: Grid,
}

impl TicTacToe {
    pub fn new() -> Self {
        TicTacToe {
            grid: Grid::new(3, 3, 3, false).expect("3x3 board is valid"),
        }
    }
}

impl Default for TicTacToe {
    fn default() -> Self {
        Self::new()
    }
}

/// Connect-k with gravity on a `cols x rows` board; moves are columns.
#[derive(Clone, Debug)]
pub struct ConnectK {
    grid: Grid,
}

impl ConnectK {
    pub fn new(cols: usize, rows: usize, k: usize) -> Result<Self> {
        Ok(ConnectK {
            grid: Grid::new(cols, rows, k, true)?,
        })
    }
}

macro_rules! delegate_grid_game {
    ($ty:ty, $name:expr) => {
        impl Game for $ty {
            fn name(&self) -> String {
                $name(self)
            }

            fn initial_state(&self) -> StateKey {
                StateKey::new(vec![EMPTY; self.grid.cells()])
            }

            fn successors(&self, s: &StateKey) -> Result<Vec<StateKey>> {
                self.grid.successors(s)
            }

            fn mover(&self, s: &StateKey) -> Result<Player> {
                Ok(self.grid.decode(s)?.1)
            }

            fn is_terminal(&self, s: &StateKey) -> Result<bool> {
                let (cells, _) = self.grid.decode(s)?;
                Ok(self.grid.terminal(cells))
            }

            fn payoff(&self, s: &StateKey) -> Result<Payoff> {
                self.grid.payoff(s)
            }

            fn empty_cells(&self, s: &StateKey) -> Option<u32> {
                self.grid.empty_cells(s)
            }

            fn material(&self, s: &StateKey) -> f64 {
                self.grid.material(s)
            }

            fn render(&self, s: &StateKey) -> String {
                self.grid.render(s)
            }
        }
    };
}

delegate_grid_game!(TicTacToe, |_: &TicTacToe| "tictactoe".to_string());
delegate_grid_game!(ConnectK, |g: &ConnectK| format!(
    "connect:{}:{}:{}",
    g.grid.cols, g.grid.rows, g.grid.k
));
