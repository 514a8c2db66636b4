//! Reduced ordered decision diagrams used as the canonical form of residual
//! formulas. Two residuals that are the same Boolean function of their
//! temporal obligations share one node, which keeps the derivative state
//! space finite.

use std::collections::HashMap;

pub(crate) type NodeId = u32;

pub(crate) const FALSE: NodeId = 0;
pub(crate) const TRUE: NodeId = 1;

const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Debug)]
pub(crate) struct Bdd {
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    and_memo: HashMap<(NodeId, NodeId), NodeId>,
    not_memo: HashMap<NodeId, NodeId>,
}

impl Bdd {
    pub(crate) fn new() -> Self {
        let terminal = |v| Node {
            var: TERMINAL_VAR,
            lo: v,
            hi: v,
        };
        Bdd {
            nodes: vec![terminal(FALSE), terminal(TRUE)],
            unique: HashMap::new(),
            and_memo: HashMap::new(),
            not_memo: HashMap::new(),
        }
    }

    pub(crate) fn is_terminal(&self, n: NodeId) -> bool {
        n <= TRUE
    }

    pub(crate) fn var_of(&self, n: NodeId) -> u32 {
        self.nodes[n as usize].var
    }

    pub(crate) fn low(&self, n: NodeId) -> NodeId {
        self.nodes[n as usize].lo
    }

    pub(crate) fn high(&self, n: NodeId) -> NodeId {
        self.nodes[n as usize].hi
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub(crate) fn var(&mut self, v: u32) -> NodeId {
        self.mk(v, FALSE, TRUE)
    }

    pub(crate) fn constant(b: bool) -> NodeId {
        if b {
            TRUE
        } else {
            FALSE
        }
    }

    pub(crate) fn not(&mut self, x: NodeId) -> NodeId {
        match x {
            FALSE => return TRUE,
            TRUE => return FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_memo.get(&x) {
            return r;
        }
        let Node { var, lo, hi } = self.nodes[x as usize];
        let (lo, hi) = (self.not(lo), self.not(hi));
        let r = self.mk(var, lo, hi);
        self.not_memo.insert(x, r);
        r
    }

    pub(crate) fn and(&mut self, x: NodeId, y: NodeId) -> NodeId {
        if x == FALSE || y == FALSE {
            return FALSE;
        }
        if x == TRUE {
            return y;
        }
        if y == TRUE || x == y {
            return x;
        }
        let key = if x < y { (x, y) } else { (y, x) };
        if let Some(&r) = self.and_memo.get(&key) {
            return r;
        }
        let (nx, ny) = (self.nodes[x as usize], self.nodes[y as usize]);
        let var = nx.var.min(ny.var);
        let (xl, xh) = if nx.var == var {
            (nx.lo, nx.hi)
        } else {
            (x, x)
        };
        let (yl, yh) = if ny.var == var {
            (ny.lo, ny.hi)
        } else {
            (y, y)
        };
        let lo = self.and(xl, yl);
        let hi = self.and(xh, yh);
        let r = self.mk(var, lo, hi);
        self.and_memo.insert(key, r);
        r
    }

    pub(crate) fn or(&mut self, x: NodeId, y: NodeId) -> NodeId {
        let (nx, ny) = (self.not(x), self.not(y));
        let n = self.and(nx, ny);
        self.not(n)
    }

    /// `if c then t else e`
    pub(crate) fn ite(&mut self, c: NodeId, t: NodeId, e: NodeId) -> NodeId {
        let ct = self.and(c, t);
        let nc = self.not(c);
        let ce = self.and(nc, e);
        self.or(ct, ce)
    }

    /// Value of `x` when every variable is false.
    pub(crate) fn all_false(&self, mut x: NodeId) -> bool {
        while !self.is_terminal(x) {
            x = self.nodes[x as usize].lo;
        }
        x == TRUE
    }
}
