//! Multi-step gridworld environments.
//!
//! A grid holds empty cells, obstacles, and goals. The agent occupies an
//! empty cell, senses its eight neighbors clockwise from north, and moves in
//! one of eight directions. Reaching a goal pays 1000 and ends the episode;
//! obstacles are impenetrable.
//!
//! Sensor codes per neighbor:
//! - 2-bit grids (cells `.`, `T`, `F`): empty `00`, obstacle `10`, goal `11`.
//! - 3-bit grids (cells `.`, `O`, `Q`, `F`, `G`): empty `000`, `O` `010`,
//!   `Q` `011`, `F` `110`, `G` `111`.
//!
//! On non-toroidal grids, positions beyond the border sense and behave like
//! obstacles.

use std::collections::VecDeque;

use rand::Rng;

use crate::condition::Bitstring;
use crate::error::{Error, Result};

/// Cell types; letters follow the conventional map notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cell {
    Empty,
    /// Obstacle `T` (2-bit sensor grids).
    Tree,
    /// Obstacle `O` (3-bit sensor grids).
    RockO,
    /// Obstacle `Q` (3-bit sensor grids).
    RockQ,
    /// Goal `F`.
    Food,
    /// Goal `G` (3-bit sensor grids).
    FoodG,
}

impl Cell {
    pub fn is_obstacle(&self) -> bool {
        matches!(self, Cell::Tree | Cell::RockO | Cell::RockQ)
    }

    pub fn is_goal(&self) -> bool {
        matches!(self, Cell::Food | Cell::FoodG)
    }

    fn from_char(c: char) -> Option<Cell> {
        match c {
            '.' => Some(Cell::Empty),
            'T' => Some(Cell::Tree),
            'O' => Some(Cell::RockO),
            'Q' => Some(Cell::RockQ),
            'F' => Some(Cell::Food),
            'G' => Some(Cell::FoodG),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

/// Direction offsets, clockwise starting north: action 0 moves north.
const DIRECTIONS: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

#[derive(Clone, Debug)]
pub struct Grid {
    cells: Vec<Cell>,
    rows: usize,
    cols: usize,
    toroidal: bool,
    sensor_bits: usize,
    empty_cells: Vec<Position>,
}

/// Parses a map: comment lines starting with `#`, an optional
/// `toroidal=<bool> sensors=<2|3>` header line, then a rectangular
/// character grid over `. T F G Q O`. Error positions refer to the
/// original text, 1-based.
pub fn parse_grid(text: &str) -> Result<Grid> {
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l))
        .collect();
    while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        lines.pop();
    }
    let mut toroidal = false;
    let mut sensor_bits = 2usize;
    let mut first_row = 0usize;
    if let Some((line_no, first)) = lines.first() {
        if first.contains('=') {
            for token in first.split_whitespace() {
                match token.split_once('=') {
                    Some(("toroidal", v)) => {
                        toroidal = v.parse().map_err(|_| Error::GridParse {
                            row: *line_no,
                            col: 1,
                            message: format!("toroidal must be true or false, got {v}"),
                        })?
                    }
                    Some(("sensors", v)) => {
                        sensor_bits = match v {
                            "2" => 2,
                            "3" => 3,
                            other => {
                                return Err(Error::GridParse {
                                    row: *line_no,
                                    col: 1,
                                    message: format!("sensors must be 2 or 3, got {other}"),
                                })
                            }
                        }
                    }
                    _ => {
                        return Err(Error::GridParse {
                            row: *line_no,
                            col: 1,
                            message: format!("unknown header token: {token}"),
                        })
                    }
                }
            }
            first_row = 1;
        }
    }
    let map_lines = &lines[first_row..];
    if map_lines.is_empty() {
        return Err(Error::GridInvalid("map has no rows".into()));
    }
    let cols = map_lines[0].1.chars().count();
    let rows = map_lines.len();
    if cols == 0 {
        return Err(Error::GridInvalid("map rows are empty".into()));
    }
    let mut cells = Vec::with_capacity(rows * cols);
    for (line_no, line) in map_lines {
        if line.chars().count() != cols {
            return Err(Error::GridParse {
                row: *line_no,
                col: line.chars().count() + 1,
                message: format!("ragged row: expected {cols} columns"),
            });
        }
        for (c, ch) in line.chars().enumerate() {
            let cell = Cell::from_char(ch).ok_or(Error::GridParse {
                row: *line_no,
                col: c + 1,
                message: format!("unknown cell character '{ch}'"),
            })?;
            let allowed = match sensor_bits {
                2 => matches!(cell, Cell::Empty | Cell::Tree | Cell::Food),
                _ => matches!(
                    cell,
                    Cell::Empty | Cell::RockO | Cell::RockQ | Cell::Food | Cell::FoodG
                ),
            };
            if !allowed {
                return Err(Error::GridParse {
                    row: *line_no,
                    col: c + 1,
                    message: format!("cell '{ch}' is not valid with sensors={sensor_bits}"),
                });
            }
            cells.push(cell);
        }
    }
    let grid = Grid {
        empty_cells: cells
            .iter()
            .enumerate()
            .filter(|(_, cell)| **cell == Cell::Empty)
            .map(|(i, _)| Position {
                row: i / cols,
                col: i % cols,
            })
            .collect(),
        cells,
        rows,
        cols,
        toroidal,
        sensor_bits,
    };
    if !grid.cells.iter().any(Cell::is_goal) {
        return Err(Error::GridInvalid("map has no goal cell".into()));
    }
    if grid.empty_cells.is_empty() {
        return Err(Error::GridInvalid("map has no empty cell".into()));
    }
    let distances = grid.goal_distances();
    let unreachable: Vec<String> = grid
        .empty_cells
        .iter()
        .filter(|p| distances[grid.index(**p)].is_none())
        .map(|p| format!("({}, {})", p.row, p.col))
        .collect();
    if !unreachable.is_empty() {
        return Err(Error::GridInvalid(format!(
            "empty cells with no path to a goal: {}",
            unreachable.join(", ")
        )));
    }
    Ok(grid)
}

impl Grid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn toroidal(&self) -> bool {
        self.toroidal
    }

    pub fn sensor_bits(&self) -> usize {
        self.sensor_bits
    }

    /// Sensory string width: 8 neighbors times the per-cell code width.
    pub fn n_input_bits(&self) -> usize {
        8 * self.sensor_bits
    }

    pub fn num_actions(&self) -> usize {
        8
    }

    pub fn empty_cells(&self) -> &[Position] {
        &self.empty_cells
    }

    pub fn cell(&self, pos: Position) -> Cell {
        self.cells[self.index(pos)]
    }

    fn index(&self, pos: Position) -> usize {
        pos.row * self.cols + pos.col
    }

    fn neighbor(&self, pos: Position, direction: usize) -> Option<Position> {
        let (dr, dc) = DIRECTIONS[direction];
        let row = pos.row as isize + dr;
        let col = pos.col as isize + dc;
        if self.toroidal {
            Some(Position {
                row: row.rem_euclid(self.rows as isize) as usize,
                col: col.rem_euclid(self.cols as isize) as usize,
            })
        } else if (0..self.rows as isize).contains(&row) && (0..self.cols as isize).contains(&col) {
            Some(Position {
                row: row as usize,
                col: col as usize,
            })
        } else {
            None
        }
    }

    /// Uniformly random empty starting cell.
    pub fn random_empty_cell<R: Rng>(&self, rng: &mut R) -> Position {
        self.empty_cells[rng.random_range(0..self.empty_cells.len())]
    }

    /// Sensory string at an empty position: neighbor codes clockwise from
    /// north. Out-of-bounds neighbors read as obstacles.
    pub fn sense(&self, pos: Position) -> Result<Bitstring> {
        if self.cell(pos) != Cell::Empty {
            return Err(Error::NotEmptyCell {
                row: pos.row,
                col: pos.col,
            });
        }
        let mut out = Bitstring::zeros(self.n_input_bits())?;
        for (i, _) in DIRECTIONS.iter().enumerate() {
            let cell = match self.neighbor(pos, i) {
                Some(p) => self.cell(p),
                None => {
                    if self.sensor_bits == 2 {
                        Cell::Tree
                    } else {
                        Cell::RockO
                    }
                }
            };
            let code: &[bool] = match (self.sensor_bits, cell) {
                (2, Cell::Empty) => &[false, false],
                (2, Cell::Tree) => &[true, false],
                (2, Cell::Food) => &[true, true],
                (3, Cell::Empty) => &[false, false, false],
                (3, Cell::RockO) => &[false, true, false],
                (3, Cell::RockQ) => &[false, true, true],
                (3, Cell::Food) => &[true, true, false],
                (3, Cell::FoodG) => &[true, true, true],
                (bits, cell) => unreachable!("cell {cell:?} in {bits}-bit grid"),
            };
            for (j, &bit) in code.iter().enumerate() {
                out.set(i * self.sensor_bits + j, bit);
            }
        }
        Ok(out)
    }

    /// Executes a move from an empty position. Obstacles (and borders)
    /// block; goals pay 1000 and end the episode.
    pub fn act(&self, pos: Position, action: usize) -> Result<(Position, f64, bool)> {
        if self.cell(pos) != Cell::Empty {
            return Err(Error::NotEmptyCell {
                row: pos.row,
                col: pos.col,
            });
        }
        let Some(target) = self.neighbor(pos, action) else {
            return Ok((pos, 0.0, false));
        };
        let cell = self.cell(target);
        if cell.is_obstacle() {
            Ok((pos, 0.0, false))
        } else if cell.is_goal() {
            Ok((target, 1000.0, true))
        } else {
            Ok((target, 0.0, false))
        }
    }

    /// Steps-to-goal of every cell via breadth-first search from the goals
    /// (8-connected through empty cells); `None` where no path exists.
    fn goal_distances(&self) -> Vec<Option<u32>> {
        let mut dist: Vec<Option<u32>> = vec![None; self.cells.len()];
        let mut queue = VecDeque::new();
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.is_goal() {
                dist[i] = Some(0);
                queue.push_back(Position {
                    row: i / self.cols,
                    col: i % self.cols,
                });
            }
        }
        while let Some(pos) = queue.pop_front() {
            let d = dist[self.index(pos)].unwrap();
            for direction in 0..8 {
                if let Some(next) = self.neighbor(pos, direction) {
                    let idx = self.index(next);
                    if self.cells[idx] == Cell::Empty && dist[idx].is_none() {
                        dist[idx] = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        dist
    }

    /// Average over all empty cells of the shortest step count to any goal.
    pub fn optimal_steps(&self) -> Result<f64> {
        let distances = self.goal_distances();
        let mut total = 0u64;
        for pos in &self.empty_cells {
            match distances[self.index(*pos)] {
                Some(d) => total += u64::from(d),
                None => {
                    return Err(Error::GridInvalid(format!(
                        "cell ({}, {}) has no path to a goal",
                        pos.row, pos.col
                    )))
                }
            }
        }
        Ok(total as f64 / self.empty_cells.len() as f64)
    }
}
