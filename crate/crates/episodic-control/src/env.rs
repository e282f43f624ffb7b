//! Deterministic gridworld tasks with image-like observations.
//!
//! Three tasks share one engine. *Forage*: collect apples scattered in a
//! walled room. *Forage-avoid*: the same with persistent lemons that cost a
//! point on every contact. *Double-T maze*: a stem leading to a T junction
//! whose two corridors each end in another T; one of the four ends holds an
//! apple, the other three are hazards. Colour cues at the junctions tell the
//! agent which way the apple lies; reaching it scores +1, teleports the agent
//! back to its start and re-draws the apple arm, while a hazard end costs -1
//! and teleports home without a re-draw.
//!
//! Observations are stacks of five `[0, 1]` channel planes (walls, agent,
//! apples, lemons, cue) flattened plane-major. Everything is a pure function
//! of `(spec, seed, action sequence)`: episode randomness (apple arm,
//! randomized start cell, and the per-episode agent shade described below)
//! comes from a ChaCha8 stream seeded at reset.
//!
//! Start modes select between the two exact-match regimes the agent can
//! face. `Fixed` always starts at the spec's start cell and renders the agent
//! at full intensity, so a revisited state reproduces its frame bit for bit.
//! `Randomized` draws the start cell per episode *and* renders the agent at a
//! per-episode shade drawn continuously from `[0.6, 1.0)`; state space aside,
//! two episodes then essentially never share a frame, which stands in for the
//! continuous viewpoint variation of a rich 3D world while keeping frames of
//! the same underlying cell close in Euclidean distance.

use crate::embeddings::ObservationFrame;
use crate::error::{EcError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of observation channel planes.
pub const CHANNELS: usize = 5;
pub const CHANNEL_WALLS: usize = 0;
pub const CHANNEL_AGENT: usize = 1;
pub const CHANNEL_APPLES: usize = 2;
pub const CHANNEL_LEMONS: usize = 3;
pub const CHANNEL_CUE: usize = 4;

/// Cue plane intensity meaning "first branch" (left at the main junction,
/// up at a side junction).
pub const CUE_RED: f64 = 1.0;
/// Cue plane intensity meaning "second branch" (right / down).
pub const CUE_GREEN: f64 = 0.5;

/// The four movement actions, in fixed index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

pub const ACTIONS: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
pub const NUM_ACTIONS: usize = 4;

impl Action {
    pub fn index(self) -> usize {
        match self {
            Action::Up => 0,
            Action::Down => 1,
            Action::Left => 2,
            Action::Right => 3,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        ACTIONS
            .get(index)
            .copied()
            .ok_or(EcError::InvalidAction { action: index, num_actions: NUM_ACTIONS })
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Forage,
    ForageAvoid,
    DoubleTMaze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    Fixed,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    Apple,
    Lemon,
}

/// The four maze arms, named by the side of the main junction and the
/// direction taken at the side junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    TopLeft,
    BottomLeft,
    TopRight,
    BottomRight,
}

pub const ARMS: [Arm; 4] = [Arm::TopLeft, Arm::BottomLeft, Arm::TopRight, Arm::BottomRight];

pub const MAZE_WIDTH: usize = 13;
pub const MAZE_HEIGHT: usize = 11;
pub const MAZE_START: (usize, usize) = (6, 9);
/// Junction at the top of the stem.
pub const MAZE_JUNCTION_MAIN: (usize, usize) = (6, 5);
pub const MAZE_JUNCTION_LEFT: (usize, usize) = (2, 5);
pub const MAZE_JUNCTION_RIGHT: (usize, usize) = (10, 5);

impl Arm {
    /// The end cell of this arm.
    pub fn end(self) -> (usize, usize) {
        match self {
            Arm::TopLeft => (2, 1),
            Arm::BottomLeft => (2, 9),
            Arm::TopRight => (10, 1),
            Arm::BottomRight => (10, 9),
        }
    }

    fn is_left(self) -> bool {
        matches!(self, Arm::TopLeft | Arm::BottomLeft)
    }

    fn is_top(self) -> bool {
        matches!(self, Arm::TopLeft | Arm::TopRight)
    }
}

/// Immutable task description: grid shape, walls, items, start rule, budget.
#[derive(Debug, Clone)]
pub struct GridWorldSpec {
    task: TaskKind,
    width: usize,
    height: usize,
    walls: Vec<bool>, // row-major, y * width + x
    items: Vec<((usize, usize), ItemKind)>,
    start_mode: StartMode,
    fixed_start: (usize, usize),
    t_max: usize,
    default_seed: Option<u64>,
}

fn perimeter_walls(width: usize, height: usize) -> Vec<bool> {
    let mut walls = vec![false; width * height];
    for x in 0..width {
        walls[x] = true;
        walls[(height - 1) * width + x] = true;
    }
    for y in 0..height {
        walls[y * width] = true;
        walls[y * width + width - 1] = true;
    }
    walls
}

fn maze_walls() -> Vec<bool> {
    let mut walls = vec![true; MAZE_WIDTH * MAZE_HEIGHT];
    let mut carve = |x: usize, y: usize| walls[y * MAZE_WIDTH + x] = false;
    for x in 2..=10 {
        carve(x, 5); // main corridor
    }
    for y in 1..=9 {
        carve(2, y); // left arms
        carve(10, y); // right arms
    }
    for y in 5..=9 {
        carve(6, y); // stem
    }
    walls
}

impl GridWorldSpec {
    /// An 8x8 walled room with five apples. Collect them all.
    pub fn forage(start_mode: StartMode) -> Self {
        Self {
            task: TaskKind::Forage,
            width: 8,
            height: 8,
            walls: perimeter_walls(8, 8),
            items: [(3, 1), (6, 2), (2, 4), (5, 5), (1, 6)]
                .into_iter()
                .map(|p| (p, ItemKind::Apple))
                .collect(),
            start_mode,
            fixed_start: (1, 1),
            t_max: 100,
            default_seed: None,
        }
    }

    /// The forage room with five persistent lemons added.
    pub fn forage_avoid(start_mode: StartMode) -> Self {
        let mut spec = Self::forage(start_mode);
        spec.task = TaskKind::ForageAvoid;
        spec.items.extend(
            [(2, 2), (4, 2), (5, 3), (3, 4), (6, 5)]
                .into_iter()
                .map(|p| (p, ItemKind::Lemon)),
        );
        spec
    }

    /// The double-T maze: stem of length 4, corridor arms of length 4,
    /// four ends, 200-step episodes.
    pub fn double_t_maze(start_mode: StartMode) -> Self {
        Self {
            task: TaskKind::DoubleTMaze,
            width: MAZE_WIDTH,
            height: MAZE_HEIGHT,
            walls: maze_walls(),
            items: Vec::new(),
            start_mode,
            fixed_start: MAZE_START,
            t_max: 200,
            default_seed: None,
        }
    }

    /// A fully custom layout; see [`validate`](Self::validate) for the rules.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        task: TaskKind,
        width: usize,
        height: usize,
        walls: Vec<bool>,
        items: Vec<((usize, usize), ItemKind)>,
        start_mode: StartMode,
        fixed_start: (usize, usize),
        t_max: usize,
    ) -> Self {
        Self { task, width, height, walls, items, start_mode, fixed_start, t_max, default_seed: None }
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start_mode(&self) -> StartMode {
        self.start_mode
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn items(&self) -> &[((usize, usize), ItemKind)] {
        &self.items
    }

    /// Seed carried by a spec file's `seed=` line, if any.
    pub fn default_seed(&self) -> Option<u64> {
        self.default_seed
    }

    /// Flattened observation length for this grid.
    pub fn frame_dim(&self) -> usize {
        self.width * self.height * CHANNELS
    }

    fn in_bounds(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height
    }

    fn is_wall(&self, x: usize, y: usize) -> bool {
        self.walls[y * self.width + x]
    }

    fn item_at(&self, pos: (usize, usize)) -> Option<usize> {
        self.items.iter().position(|(p, _)| *p == pos)
    }

    fn start_candidates(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_wall(x, y) || self.item_at((x, y)).is_some() {
                    continue;
                }
                if self.task == TaskKind::DoubleTMaze && ARMS.iter().any(|a| a.end() == (x, y)) {
                    continue;
                }
                cells.push((x, y));
            }
        }
        cells
    }

    /// Checks the structural rules, reporting every violation at once.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.width == 0 || self.height == 0 {
            violations.push("grid must have positive width and height".to_string());
        }
        if self.walls.len() != self.width * self.height {
            violations.push(format!(
                "wall mask has {} cells for a {}x{} grid",
                self.walls.len(),
                self.width,
                self.height
            ));
        }
        if self.t_max == 0 {
            violations.push("step budget t_max must be at least 1".to_string());
        }
        if !violations.is_empty() {
            // Cannot index cells safely below.
            return Err(EcError::InvalidSpec(violations));
        }
        let (sx, sy) = self.fixed_start;
        if !self.in_bounds(sx, sy) {
            violations.push(format!("start ({sx},{sy}) is out of bounds"));
        } else if self.is_wall(sx, sy) {
            violations.push(format!("start ({sx},{sy}) is a wall cell"));
        } else if self.item_at((sx, sy)).is_some() {
            violations.push(format!("start ({sx},{sy}) sits on an item"));
        }
        let mut seen = std::collections::HashSet::new();
        for ((x, y), kind) in &self.items {
            if !self.in_bounds(*x, *y) {
                violations.push(format!("{kind:?} at ({x},{y}) is out of bounds"));
                continue;
            }
            if self.is_wall(*x, *y) {
                violations.push(format!("{kind:?} at ({x},{y}) is on a wall"));
            }
            if !seen.insert((*x, *y)) {
                violations.push(format!("two items share cell ({x},{y})"));
            }
        }
        if matches!(self.task, TaskKind::Forage | TaskKind::ForageAvoid)
            && !self.items.iter().any(|(_, kind)| *kind == ItemKind::Apple)
        {
            violations.push("forage tasks need at least one apple".to_string());
        }
        if self.task == TaskKind::DoubleTMaze {
            if !self.items.is_empty() {
                violations.push("double-t-maze derives its items from the apple arm; the item list must be empty".to_string());
            }
            if self.width != MAZE_WIDTH || self.height != MAZE_HEIGHT {
                violations.push(format!(
                    "double-t-maze layout is fixed at {MAZE_WIDTH}x{MAZE_HEIGHT}"
                ));
            } else if self.walls != maze_walls() {
                violations.push("double-t-maze walls differ from the canonical layout".to_string());
            }
        }
        if self.start_mode == StartMode::Randomized && self.start_candidates().is_empty() {
            violations.push("randomized start mode needs at least one free floor cell".to_string());
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(EcError::InvalidSpec(violations))
        }
    }

    /// Starts an episode. All per-episode randomness (apple arm, randomized
    /// start cell, agent shade) is drawn from a ChaCha8 stream seeded with
    /// `seed`, in that order, so `(spec, seed)` fully determines the episode
    /// apart from the actions taken.
    pub fn reset(&self, seed: u64) -> Result<(EnvState, ObservationFrame)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let apple_arm = if self.task == TaskKind::DoubleTMaze {
            Some(ARMS[rng.random_range(0..ARMS.len())])
        } else {
            None
        };
        let (start, shade) = match self.start_mode {
            StartMode::Fixed => (self.fixed_start, 1.0),
            StartMode::Randomized => {
                let cells = self.start_candidates();
                let cell = cells[rng.random_range(0..cells.len())];
                (cell, 0.6 + 0.4 * rng.random::<f64>())
            }
        };
        let state = EnvState {
            spec: self.clone(),
            agent: start,
            start,
            t: 0,
            remaining: vec![true; self.items.len()],
            apple_arm,
            shade,
            rng,
            done: false,
        };
        let frame = state.render();
        Ok((state, frame))
    }

    /// Parses a line-oriented `key=value` description.
    ///
    /// Accepted keys: `task` (forage | forage-avoid | double-t-maze),
    /// `width`, `height`, `items` (`kind@x,y` joined by `;`), `start_mode`
    /// (fixed | randomized), `t_max`, `seed`. Unknown keys are rejected with
    /// their line number. Forage-family grids get a wall perimeter and start
    /// at (1,1); with no `width`, `height` or `items` given they come
    /// furnished with the canonical item layout, while a custom-shaped room
    /// must list its own items. The maze layout is fixed and takes no
    /// `items`, `width` or `height` other than its own. Blank lines and `#`
    /// comments are skipped.
    pub fn from_key_value_text(text: &str) -> Result<Self> {
        let mut task = None;
        let mut width = None;
        let mut height = None;
        let mut items: Option<Vec<((usize, usize), ItemKind)>> = None;
        let mut start_mode = StartMode::Fixed;
        let mut t_max = None;
        let mut default_seed = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let config_err = |message: String| EcError::Config { line: lineno, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("expected key=value, found {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "task" => {
                    task = Some(match value {
                        "forage" => TaskKind::Forage,
                        "forage-avoid" => TaskKind::ForageAvoid,
                        "double-t-maze" => TaskKind::DoubleTMaze,
                        other => return Err(config_err(format!("unknown task {other:?}"))),
                    });
                }
                "width" => {
                    width = Some(value.parse::<usize>().map_err(|e| config_err(format!("bad width: {e}")))?)
                }
                "height" => {
                    height =
                        Some(value.parse::<usize>().map_err(|e| config_err(format!("bad height: {e}")))?)
                }
                "items" => {
                    let mut parsed = Vec::new();
                    for piece in value.split(';').filter(|p| !p.trim().is_empty()) {
                        let (kind, pos) = piece
                            .trim()
                            .split_once('@')
                            .ok_or_else(|| config_err(format!("item {piece:?} is not kind@x,y")))?;
                        let kind = match kind {
                            "apple" => ItemKind::Apple,
                            "lemon" => ItemKind::Lemon,
                            other => return Err(config_err(format!("unknown item kind {other:?}"))),
                        };
                        let (x, y) = pos
                            .split_once(',')
                            .ok_or_else(|| config_err(format!("item position {pos:?} is not x,y")))?;
                        let x = x.trim().parse::<usize>().map_err(|e| config_err(format!("bad item x: {e}")))?;
                        let y = y.trim().parse::<usize>().map_err(|e| config_err(format!("bad item y: {e}")))?;
                        parsed.push(((x, y), kind));
                    }
                    items = Some(parsed);
                }
                "start_mode" => {
                    start_mode = match value {
                        "fixed" => StartMode::Fixed,
                        "randomized" => StartMode::Randomized,
                        other => return Err(config_err(format!("unknown start mode {other:?}"))),
                    };
                }
                "t_max" => {
                    t_max =
                        Some(value.parse::<usize>().map_err(|e| config_err(format!("bad t_max: {e}")))?)
                }
                "seed" => {
                    default_seed =
                        Some(value.parse::<u64>().map_err(|e| config_err(format!("bad seed: {e}")))?)
                }
                other => return Err(config_err(format!("unknown key {other:?}"))),
            }
        }
        let task = task.ok_or(EcError::Config { line: 0, message: "missing required key task".into() })?;
        let mut spec = match task {
            TaskKind::DoubleTMaze => {
                let spec = Self::double_t_maze(start_mode);
                if let Some(w) = width {
                    if w != MAZE_WIDTH {
                        return Err(EcError::Config {
                            line: 0,
                            message: format!("double-t-maze width is fixed at {MAZE_WIDTH}"),
                        });
                    }
                }
                if let Some(h) = height {
                    if h != MAZE_HEIGHT {
                        return Err(EcError::Config {
                            line: 0,
                            message: format!("double-t-maze height is fixed at {MAZE_HEIGHT}"),
                        });
                    }
                }
                if items.as_ref().is_some_and(|i| !i.is_empty()) {
                    return Err(EcError::Config {
                        line: 0,
                        message: "double-t-maze takes no items".into(),
                    });
                }
                spec
            }
            family => {
                let custom_shape = width.is_some() || height.is_some();
                let width = width.unwrap_or(8);
                let height = height.unwrap_or(8);
                let items = match items {
                    Some(list) => list,
                    // The default 8x8 room comes furnished; a custom room
                    // must list its own items.
                    None if custom_shape => Vec::new(),
                    None => match family {
                        TaskKind::Forage => Self::forage(start_mode).items,
                        _ => Self::forage_avoid(start_mode).items,
                    },
                };
                Self {
                    task: family,
                    width,
                    height,
                    walls: perimeter_walls(width.max(1), height.max(1)),
                    items,
                    start_mode,
                    fixed_start: (1, 1),
                    t_max: 0, // replaced below
                    default_seed: None,
                }
            }
        };
        spec.start_mode = start_mode;
        spec.t_max = t_max.unwrap_or(match task {
            TaskKind::DoubleTMaze => 200,
            _ => 100,
        });
        spec.default_seed = default_seed;
        spec.validate()?;
        Ok(spec)
    }
}

/// One step's results: the new observation, the reward earned, and whether
/// the episode has ended.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: ObservationFrame,
    pub reward: f64,
    pub done: bool,
}

/// Mutable episode state. Owns a copy of its spec, so it is self-contained.
#[derive(Debug, Clone)]
pub struct EnvState {
    spec: GridWorldSpec,
    agent: (usize, usize),
    start: (usize, usize),
    t: usize,
    remaining: Vec<bool>,
    apple_arm: Option<Arm>,
    shade: f64,
    rng: ChaCha8Rng,
    done: bool,
}

impl EnvState {
    pub fn spec(&self) -> &GridWorldSpec {
        &self.spec
    }

    pub fn agent(&self) -> (usize, usize) {
        self.agent
    }

    /// The cell the agent started this episode at (and is teleported back to
    /// in the maze).
    pub fn start(&self) -> (usize, usize) {
        self.start
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn done(&self) -> bool {
        self.done
    }

    /// The arm currently holding the apple (maze only).
    pub fn apple_arm(&self) -> Option<Arm> {
        self.apple_arm
    }

    /// How many apples are still uncollected (forage family).
    pub fn apples_remaining(&self) -> usize {
        self.spec
            .items
            .iter()
            .zip(&self.remaining)
            .filter(|((_, kind), rem)| **rem && *kind == ItemKind::Apple)
            .count()
    }

    /// Applies one action. Moving into a wall or off the grid leaves the
    /// agent in place; time always advances. Rewards are -1, 0 or +1.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.done {
            return Err(EcError::EpisodeFinished);
        }
        self.t += 1;
        let (dx, dy) = action.delta();
        let nx = self.agent.0 as isize + dx;
        let ny = self.agent.1 as isize + dy;
        if nx >= 0
            && ny >= 0
            && self.spec.in_bounds(nx as usize, ny as usize)
            && !self.spec.is_wall(nx as usize, ny as usize)
        {
            self.agent = (nx as usize, ny as usize);
        }
        let mut reward = 0.0;
        match self.spec.task {
            TaskKind::Forage | TaskKind::ForageAvoid => {
                if let Some(idx) = self.spec.item_at(self.agent) {
                    if self.remaining[idx] {
                        match self.spec.items[idx].1 {
                            ItemKind::Apple => {
                                reward = 1.0;
                                self.remaining[idx] = false;
                            }
                            ItemKind::Lemon => {
                                // Lemons persist: every contact costs a point.
                                reward = -1.0;
                            }
                        }
                    }
                }
            }
            TaskKind::DoubleTMaze => {
                let arm = self.apple_arm.expect("maze state always has an apple arm");
                if let Some(reached) = ARMS.iter().find(|a| a.end() == self.agent) {
                    if *reached == arm {
                        reward = 1.0;
                        self.agent = self.start;
                        self.apple_arm = Some(ARMS[self.rng.random_range(0..ARMS.len())]);
                    } else {
                        reward = -1.0;
                        self.agent = self.start;
                    }
                }
            }
        }
        let out_of_time = self.t >= self.spec.t_max;
        let foraged_out = matches!(self.spec.task, TaskKind::Forage | TaskKind::ForageAvoid)
            && self.apples_remaining() == 0;
        self.done = out_of_time || foraged_out;
        Ok(StepOutcome { observation: self.render(), reward, done: self.done })
    }

    /// Renders the five channel planes for the current state.
    ///
    /// Walls, apples and lemons are drawn at full intensity; the agent is
    /// drawn at this episode's shade. In the maze the apple plane marks the
    /// apple's end, the lemon plane marks all four ends (a static hazard
    /// marker, so re-drawing the arm only moves the apple and cue planes),
    /// and the cue plane marks the junctions: [`CUE_RED`] for "first branch"
    /// (left / up), [`CUE_GREEN`] for "second branch" (right / down). The
    /// side junction away from the apple shows no cue.
    pub fn render(&self) -> ObservationFrame {
        let w = self.spec.width;
        let h = self.spec.height;
        let size = w * h;
        let mut pixels = vec![0.0; size * CHANNELS];
        let mut set = |channel: usize, (x, y): (usize, usize), value: f64| {
            pixels[channel * size + y * w + x] = value;
        };
        for y in 0..h {
            for x in 0..w {
                if self.spec.is_wall(x, y) {
                    set(CHANNEL_WALLS, (x, y), 1.0);
                }
            }
        }
        set(CHANNEL_AGENT, self.agent, self.shade);
        match self.spec.task {
            TaskKind::Forage | TaskKind::ForageAvoid => {
                for (((x, y), kind), remaining) in self.spec.items.iter().zip(&self.remaining) {
                    match kind {
                        ItemKind::Apple if *remaining => set(CHANNEL_APPLES, (*x, *y), 1.0),
                        ItemKind::Lemon => set(CHANNEL_LEMONS, (*x, *y), 1.0),
                        _ => {}
                    }
                }
            }
            TaskKind::DoubleTMaze => {
                let arm = self.apple_arm.expect("maze state always has an apple arm");
                set(CHANNEL_APPLES, arm.end(), 1.0);
                for a in ARMS {
                    set(CHANNEL_LEMONS, a.end(), 1.0);
                }
                let main_cue = if arm.is_left() { CUE_RED } else { CUE_GREEN };
                set(CHANNEL_CUE, MAZE_JUNCTION_MAIN, main_cue);
                let side_junction =
                    if arm.is_left() { MAZE_JUNCTION_LEFT } else { MAZE_JUNCTION_RIGHT };
                let side_cue = if arm.is_top() { CUE_RED } else { CUE_GREEN };
                set(CHANNEL_CUE, side_junction, side_cue);
            }
        }
        ObservationFrame::new(pixels, h, w, CHANNELS)
            .expect("rendered planes are in range by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_value(frame: &ObservationFrame, channel: usize, (x, y): (usize, usize)) -> f64 {
        frame.plane(channel).unwrap()[y * frame.width() + x]
    }

    #[test]
    fn forage_reset_places_agent_and_apples() {
        let spec = GridWorldSpec::forage(StartMode::Fixed);
        let (state, frame) = spec.reset(0).unwrap();
        assert_eq!(state.agent(), (1, 1));
        assert_eq!(state.apples_remaining(), 5);
        assert!(!state.done());
        assert_eq!(plane_value(&frame, CHANNEL_AGENT, (1, 1)), 1.0);
        assert_eq!(plane_value(&frame, CHANNEL_APPLES, (3, 1)), 1.0);
        assert_eq!(plane_value(&frame, CHANNEL_WALLS, (0, 0)), 1.0);
        assert_eq!(plane_value(&frame, CHANNEL_WALLS, (1, 1)), 0.0);
        let cue: f64 = frame.plane(CHANNEL_CUE).unwrap().iter().sum();
        assert_eq!(cue, 0.0);
    }

    #[test]
    fn walls_block_movement_but_time_advances() {
        let spec = GridWorldSpec::forage(StartMode::Fixed);
        let (mut state, _) = spec.reset(0).unwrap();
        let out = state.step(Action::Up).unwrap(); // (1,1) -> wall row above
        assert_eq!(state.agent(), (1, 1));
        assert_eq!(out.reward, 0.0);
        assert_eq!(state.t(), 1);
        let out = state.step(Action::Right).unwrap();
        assert_eq!(state.agent(), (2, 1));
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn collecting_an_apple_rewards_once_and_removes_it() {
        let spec = GridWorldSpec::forage(StartMode::Fixed);
        let (mut state, _) = spec.reset(0).unwrap();
        state.step(Action::Right).unwrap(); // (2,1)
        let out = state.step(Action::Right).unwrap(); // (3,1): apple
        assert_eq!(out.reward, 1.0);
        assert_eq!(state.apples_remaining(), 4);
        assert_eq!(plane_value(&out.observation, CHANNEL_APPLES, (3, 1)), 0.0);
        // Walking off and back on earns nothing the second time.
        state.step(Action::Left).unwrap();
        let again = state.step(Action::Right).unwrap();
        assert_eq!(again.reward, 0.0);
    }

    #[test]
    fn lemons_penalize_on_every_contact() {
        let spec = GridWorldSpec::forage_avoid(StartMode::Fixed);
        let (mut state, _) = spec.reset(0).unwrap();
        state.step(Action::Down).unwrap(); // (1,2)
        let hit = state.step(Action::Right).unwrap(); // (2,2): lemon
        assert_eq!(hit.reward, -1.0);
        assert_eq!(plane_value(&hit.observation, CHANNEL_LEMONS, (2, 2)), 1.0);
        state.step(Action::Left).unwrap();
        let hit_again = state.step(Action::Right).unwrap();
        assert_eq!(hit_again.reward, -1.0, "lemons persist");
    }

    #[test]
    fn episode_ends_at_t_max_and_stepping_past_done_is_an_error() {
        let mut spec = GridWorldSpec::forage(StartMode::Fixed);
        spec.t_max = 3;
        let (mut state, _) = spec.reset(0).unwrap();
        assert!(!state.step(Action::Up).unwrap().done);
        assert!(!state.step(Action::Up).unwrap().done);
        let last = state.step(Action::Up).unwrap();
        assert!(last.done);
        assert!(matches!(state.step(Action::Up), Err(EcError::EpisodeFinished)));
    }

    #[test]
    fn collecting_every_apple_ends_the_episode() {
        // A tiny room with one apple right of the start.
        let spec = GridWorldSpec::from_parts(
            TaskKind::Forage,
            4,
            3,
            perimeter_walls(4, 3),
            vec![((2, 1), ItemKind::Apple)],
            StartMode::Fixed,
            (1, 1),
            50,
        );
        let (mut state, _) = spec.reset(0).unwrap();
        let out = state.step(Action::Right).unwrap();
        assert_eq!(out.reward, 1.0);
        assert!(out.done);
    }

    #[test]
    fn rewards_stay_in_unit_range_under_random_play() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for spec in [
            GridWorldSpec::forage(StartMode::Randomized),
            GridWorldSpec::forage_avoid(StartMode::Randomized),
            GridWorldSpec::double_t_maze(StartMode::Randomized),
        ] {
            let (mut state, _) = spec.reset(rng.random()).unwrap();
            while !state.done() {
                let action = ACTIONS[rng.random_range(0..4)];
                let out = state.step(action).unwrap();
                assert!(out.reward == 0.0 || out.reward == 1.0 || out.reward == -1.0);
            }
            assert!(state.t() <= spec.t_max());
        }
    }

    #[test]
    fn same_seed_replays_identically_and_seeds_differ_by_shade() {
        let spec = GridWorldSpec::forage(StartMode::Randomized);
        let (mut a, fa) = spec.reset(123).unwrap();
        let (mut b, fb) = spec.reset(123).unwrap();
        assert_eq!(fa.pixels(), fb.pixels());
        for action in [Action::Right, Action::Down, Action::Right, Action::Up] {
            let oa = a.step(action).unwrap();
            let ob = b.step(action).unwrap();
            assert_eq!(oa.reward, ob.reward);
            assert_eq!(oa.observation.pixels(), ob.observation.pixels());
        }
        let (c, fc) = spec.reset(124).unwrap();
        let shade_a: f64 = fa.plane(CHANNEL_AGENT).unwrap().iter().sum();
        let shade_c: f64 = fc.plane(CHANNEL_AGENT).unwrap().iter().sum();
        assert!(shade_a != shade_c || a.start() != c.start());
    }

    /// Walks to the apple by reading the rendered cue pixels, for whichever
    /// arm the reset drew.
    fn follow_cues(state: &mut EnvState, frame: &ObservationFrame) -> f64 {
        let mut total = 0.0;
        let mut frame = frame.clone();
        // Stem: climb to the main junction.
        while state.agent() != MAZE_JUNCTION_MAIN {
            let out = state.step(Action::Up).unwrap();
            total += out.reward;
            frame = out.observation;
        }
        let main_cue = plane_value(&frame, CHANNEL_CUE, MAZE_JUNCTION_MAIN);
        let (sideways, side_junction) = if main_cue == CUE_RED {
            (Action::Left, MAZE_JUNCTION_LEFT)
        } else {
            (Action::Right, MAZE_JUNCTION_RIGHT)
        };
        while state.agent() != side_junction {
            let out = state.step(sideways).unwrap();
            total += out.reward;
            frame = out.observation;
        }
        let side_cue = plane_value(&frame, CHANNEL_CUE, side_junction);
        let vertical = if side_cue == CUE_RED { Action::Up } else { Action::Down };
        for _ in 0..4 {
            let out = state.step(vertical).unwrap();
            total += out.reward;
        }
        total
    }

    #[test]
    fn following_the_cues_finds_the_apple_from_any_arm() {
        let spec = GridWorldSpec::double_t_maze(StartMode::Fixed);
        let mut arms_seen = std::collections::HashSet::new();
        for seed in 0..32u64 {
            let (mut state, frame) = spec.reset(seed).unwrap();
            arms_seen.insert(format!("{:?}", state.apple_arm().unwrap()));
            let total = follow_cues(&mut state, &frame);
            assert_eq!(total, 1.0, "seed {seed}: cue route must reach the apple");
            assert_eq!(state.agent(), MAZE_START, "apple teleports the agent home");
        }
        assert_eq!(arms_seen.len(), 4, "all four arms appear across seeds");
    }

    #[test]
    fn wrong_end_costs_a_point_and_keeps_the_arm() {
        let spec = GridWorldSpec::double_t_maze(StartMode::Fixed);
        // Find a seed whose apple is NOT in the top-left arm.
        let seed = (0..32u64)
            .find(|s| {
                let (state, _) = spec.reset(*s).unwrap();
                state.apple_arm() != Some(Arm::TopLeft)
            })
            .unwrap();
        let (mut state, _) = spec.reset(seed).unwrap();
        let arm_before = state.apple_arm().unwrap();
        let mut total = 0.0;
        for _ in 0..4 {
            total += state.step(Action::Up).unwrap().reward;
        }
        for _ in 0..4 {
            total += state.step(Action::Left).unwrap().reward;
        }
        for _ in 0..4 {
            total += state.step(Action::Up).unwrap().reward;
        }
        assert_eq!(total, -1.0);
        assert_eq!(state.agent(), MAZE_START, "hazard end teleports home");
        assert_eq!(state.apple_arm(), Some(arm_before), "arm only re-draws on success");
    }

    #[test]
    fn apple_collection_redraws_the_arm_with_consistent_planes() {
        let spec = GridWorldSpec::double_t_maze(StartMode::Fixed);
        // Drive enough episodes that at least one re-draw changes the arm.
        let mut saw_change = false;
        for seed in 0..16u64 {
            let (mut state, frame) = spec.reset(seed).unwrap();
            let before = state.apple_arm().unwrap();
            follow_cues(&mut state, &frame);
            let after = state.apple_arm().unwrap();
            let frame = state.render();
            assert_eq!(plane_value(&frame, CHANNEL_APPLES, after.end()), 1.0);
            for arm in ARMS {
                assert_eq!(plane_value(&frame, CHANNEL_LEMONS, arm.end()), 1.0);
            }
            if after != before {
                saw_change = true;
            }
        }
        assert!(saw_change);
    }

    #[test]
    fn arm_changes_touch_only_apple_and_cue_planes() {
        let spec = GridWorldSpec::double_t_maze(StartMode::Fixed);
        let find = |want_left: bool| {
            (0..64u64)
                .map(|s| spec.reset(s).unwrap().0)
                .find(|st| st.apple_arm().unwrap().is_left() == want_left)
                .unwrap()
        };
        let left_state = find(true);
        let right_state = find(false);
        let fa = left_state.render();
        let fb = right_state.render();
        assert_eq!(fa.plane(CHANNEL_WALLS).unwrap(), fb.plane(CHANNEL_WALLS).unwrap());
        assert_eq!(fa.plane(CHANNEL_AGENT).unwrap(), fb.plane(CHANNEL_AGENT).unwrap());
        assert_eq!(fa.plane(CHANNEL_LEMONS).unwrap(), fb.plane(CHANNEL_LEMONS).unwrap());
        assert_ne!(fa.plane(CHANNEL_APPLES).unwrap(), fb.plane(CHANNEL_APPLES).unwrap());
        assert_ne!(fa.plane(CHANNEL_CUE).unwrap(), fb.plane(CHANNEL_CUE).unwrap());
    }

    #[test]
    fn two_by_two_room_renders_one_agent_pixel() {
        let spec = GridWorldSpec::from_parts(
            TaskKind::Forage,
            2,
            2,
            vec![false; 4],
            vec![((1, 1), ItemKind::Apple)],
            StartMode::Fixed,
            (0, 0),
            10,
        );
        let (_, frame) = spec.reset(0).unwrap();
        let agent_plane = frame.plane(CHANNEL_AGENT).unwrap();
        assert_eq!(agent_plane.iter().filter(|p| **p != 0.0).count(), 1);
        assert_eq!(frame.plane(CHANNEL_WALLS).unwrap().iter().sum::<f64>(), 0.0);
        assert_eq!(frame.dim(), 2 * 2 * CHANNELS);
    }

    #[test]
    fn validation_reports_all_violations() {
        let spec = GridWorldSpec::from_parts(
            TaskKind::Forage,
            4,
            4,
            perimeter_walls(4, 4),
            vec![
                ((0, 0), ItemKind::Apple),  // on a wall
                ((9, 9), ItemKind::Lemon),  // out of bounds
                ((2, 2), ItemKind::Apple),
                ((2, 2), ItemKind::Apple),  // duplicate cell
            ],
            StartMode::Fixed,
            (0, 1), // on a wall
            10,
        );
        let err = spec.validate().unwrap_err();
        match err {
            EcError::InvalidSpec(violations) => {
                assert!(violations.len() >= 4, "got: {violations:?}");
            }
            other => panic!("expected InvalidSpec, got {other:?}"),
        }
        assert!(spec.reset(0).is_err(), "reset refuses an invalid spec");
    }

    #[test]
    fn maze_rejects_explicit_items() {
        let mut spec = GridWorldSpec::double_t_maze(StartMode::Fixed);
        spec.items.push(((6, 6), ItemKind::Apple));
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_files_round_trip_the_documented_keys() {
        let text = "\
# a small avoidance task
task=forage-avoid
width=6
height=6
items=apple@2,2; lemon@3,3
start_mode=randomized
t_max=40
seed=9
";
        let spec = GridWorldSpec::from_key_value_text(text).unwrap();
        assert_eq!(spec.task(), TaskKind::ForageAvoid);
        assert_eq!(spec.width(), 6);
        assert_eq!(spec.items().len(), 2);
        assert_eq!(spec.start_mode(), StartMode::Randomized);
        assert_eq!(spec.t_max(), 40);
        assert_eq!(spec.default_seed(), Some(9));
        spec.reset(spec.default_seed().unwrap()).unwrap();
    }

    #[test]
    fn spec_files_reject_unknown_or_malformed_lines() {
        let unknown = "task=forage\nwalls=everywhere\n";
        match GridWorldSpec::from_key_value_text(unknown) {
            Err(EcError::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("walls"));
            }
            other => panic!("expected a config error, got {other:?}"),
        }
        assert!(GridWorldSpec::from_key_value_text("width=8\n").is_err(), "task is required");
        assert!(GridWorldSpec::from_key_value_text("task=forage\nitems=apple|2,2\n").is_err());
        assert!(
            GridWorldSpec::from_key_value_text("task=forage\nwidth=6\nheight=6\n").is_err(),
            "a custom-shaped room must list at least one apple"
        );
        assert!(
            GridWorldSpec::from_key_value_text("task=forage\nitems=lemon@2,2\n").is_err(),
            "forage needs an apple even with explicit items"
        );
        assert!(GridWorldSpec::from_key_value_text("task=double-t-maze\nitems=apple@2,2\n").is_err());
        assert!(GridWorldSpec::from_key_value_text("task=double-t-maze\nwidth=9\n").is_err());
        let maze = GridWorldSpec::from_key_value_text("task=double-t-maze\n").unwrap();
        assert_eq!(maze.t_max(), 200);
        assert_eq!((maze.width(), maze.height()), (MAZE_WIDTH, MAZE_HEIGHT));
    }

    #[test]
    fn bare_forage_files_come_furnished() {
        let forage = GridWorldSpec::from_key_value_text("task=forage\n").unwrap();
        assert_eq!(forage.items().len(), 5);
        assert_eq!(forage.t_max(), 100);
        let avoid = GridWorldSpec::from_key_value_text("task=forage-avoid\n").unwrap();
        assert_eq!(avoid.items().len(), 10);
        let (state, _) = avoid.reset(1).unwrap();
        assert_eq!(state.apples_remaining(), 5);
    }
}
