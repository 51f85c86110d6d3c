/// Upward-downward passes of one distributed iteration, plus the one-off
/// setup exchange before the first iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pass {
    Setup,
    Direction,
    StepSize,
    Termination,
}

impl Pass {
    pub fn label(self) -> &'static str {
        match self {
            Pass::Setup => "setup",
            Pass::Direction => "direction",
            Pass::StepSize => "step-size",
            Pass::Termination => "perturbation-termination",
        }
    }

    /// Passes run in every iteration.
    pub const ITERATION: [Pass; 3] = [Pass::Direction, Pass::StepSize, Pass::Termination];
}

/// One agent's traffic in one pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommRecord {
    pub iter: usize,
    pub pass: Pass,
    pub agent: usize,
    /// Communication rounds taken part in: one upward, one downward.
    pub communications: usize,
    pub msgs_sent: usize,
    /// Scalars sent to the parent.
    pub scalars_up: usize,
    /// Scalars sent to the children, all together.
    pub scalars_down: usize,
}

impl CommRecord {
    pub fn scalars_sent(&self) -> usize {
        self.scalars_up + self.scalars_down
    }
}

/// Traffic of a distributed solve. Iteration 0 holds the setup exchange,
/// which is not part of the per-iteration accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommLog {
    n_agents: usize,
    height: usize,
    iterations: usize,
    records: Vec<CommRecord>,
}

impl CommLog {
    pub fn new(n_agents: usize, height: usize) -> Self {
        CommLog { n_agents, height, iterations: 0, records: Vec::new() }
    }

    /// Log one upward-downward pass; `up[k]` and `down[k]` are the
    /// `(messages, scalars)` agent `k` sent in each sweep.
    pub fn record_pass(&mut self, iter: usize, pass: Pass, up: &[(usize, usize)], down: &[(usize, usize)]) {
        for k in 0..self.n_agents {
            self.records.push(CommRecord {
                iter,
                pass,
                agent: k,
                communications: 2,
                msgs_sent: up[k].0 + down[k].0,
                scalars_up: up[k].1,
                scalars_down: down[k].1,
            });
        }
        self.iterations = self.iterations.max(iter);
    }

    pub fn records(&self) -> &[CommRecord] {
        &self.records
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Iterations logged, `p`.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn per_agent(&self, f: impl Fn(&CommRecord) -> usize) -> Vec<usize> {
        let mut out = vec![0; self.n_agents];
        for r in self.records.iter().filter(|r| r.pass != Pass::Setup) {
            out[r.agent] += f(r);
        }
        out
    }

    /// Communications of every agent over all iterations.
    pub fn per_agent_communications(&self) -> Vec<usize> {
        self.per_agent(|r| r.communications)
    }

    pub fn per_agent_messages(&self) -> Vec<usize> {
        self.per_agent(|r| r.msgs_sent)
    }

    pub fn per_agent_scalars(&self) -> Vec<usize> {
        self.per_agent(|r| r.scalars_sent())
    }

    pub fn record(&self, iter: usize, pass: Pass, agent: usize) -> Option<&CommRecord> {
        self.records.iter().find(|r| r.iter == iter && r.pass == pass && r.agent == agent)
    }

    /// Sequential message steps of the iterations: `2h` per pass.
    pub fn sequential_steps(&self) -> usize {
        let passes = self.records.iter().filter(|r| r.pass != Pass::Setup && r.agent == 0).count();
        passes * 2 * self.height
    }
}
