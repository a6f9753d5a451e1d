//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's math; inputs and outputs are plain
//! `(f64, f64)` tuples so the two implementations share no code.

#![allow(dead_code)]

use std::f64::consts::TAU;

pub type P = (f64, f64);

pub fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

pub fn add(a: P, b: P) -> P {
    (a.0 + b.0, a.1 + b.1)
}

pub fn scale(a: P, k: f64) -> P {
    (a.0 * k, a.1 * k)
}

pub fn norm(a: P) -> f64 {
    a.0.hypot(a.1)
}

/// Membership via the explicit matrix `M = R diag(a², b²) Rᵀ` and its inverse.
pub fn ellipse_contains(observer: P, heading: f64, a: f64, b: f64, other: P) -> bool {
    let (c, s) = (heading.cos(), heading.sin());
    let m11 = c * c * a * a + s * s * b * b;
    let m12 = c * s * (a * a - b * b);
    let m22 = s * s * a * a + c * c * b * b;
    let det = m11 * m22 - m12 * m12;
    let (i11, i12, i22) = (m22 / det, -m12 / det, m11 / det);
    let d = sub(other, observer);
    d.0 * d.0 * i11 + 2.0 * d.0 * d.1 * i12 + d.1 * d.1 * i22 <= 1.0
}

#[derive(Clone, Copy, Debug)]
pub struct RefBoid {
    pub id: u64,
    pub p: P,
    pub v: P,
}

pub fn heading(v: P) -> f64 {
    if v == (0.0, 0.0) {
        0.0
    } else {
        v.1.atan2(v.0)
    }
}

pub fn visible(me: &RefBoid, flock: &[RefBoid], a: f64, b: f64) -> Vec<RefBoid> {
    let h = heading(me.v);
    let mut out = Vec::new();
    for other in flock {
        if other.id != me.id && ellipse_contains(me.p, h, a, b, other.p) {
            out.push(*other);
        }
    }
    out
}

pub fn separation(me: &RefBoid, vis: &[RefBoid]) -> P {
    let mut acc = (0.0, 0.0);
    for o in vis {
        acc = add(acc, sub(me.p, o.p));
    }
    acc
}

pub fn cohesion(me: &RefBoid, vis: &[RefBoid]) -> P {
    if vis.is_empty() {
        return (0.0, 0.0);
    }
    let mut acc = (0.0, 0.0);
    for o in vis {
        acc = add(acc, o.p);
    }
    sub(scale(acc, 1.0 / vis.len() as f64), me.p)
}

pub fn leader_cohesion(me: &RefBoid, lead: P) -> P {
    sub(lead, me.p)
}

pub fn alignment(me: &RefBoid, vis: &[RefBoid]) -> P {
    if vis.is_empty() {
        return (0.0, 0.0);
    }
    let mut acc = (0.0, 0.0);
    for o in vis {
        acc = add(acc, o.v);
    }
    sub(scale(acc, 1.0 / vis.len() as f64), me.v)
}

pub fn alignment_with_lead(me: &RefBoid, vis: &[RefBoid], lead_v: P) -> P {
    let mut acc = lead_v;
    for o in vis {
        acc = add(acc, o.v);
    }
    sub(scale(acc, 1.0 / (vis.len() + 1) as f64), me.v)
}

/// Mean of the members of each foreign flock inside the observer's view;
/// flocks with no visible member are skipped.
pub fn foreign_centers(me: &RefBoid, foreign: &[Vec<RefBoid>], a: f64, b: f64) -> Vec<P> {
    let h = heading(me.v);
    let mut out = Vec::new();
    for flock in foreign {
        let seen: Vec<P> = flock
            .iter()
            .filter(|o| ellipse_contains(me.p, h, a, b, o.p))
            .map(|o| o.p)
            .collect();
        if !seen.is_empty() {
            let sum = seen.iter().fold((0.0, 0.0), |acc, &p| add(acc, p));
            out.push(scale(sum, 1.0 / seen.len() as f64));
        }
    }
    out
}

/// Lateral-only push `sgn(Δy)·exp(g − d)` per visible foreign center.
pub fn repulsion(me: &RefBoid, centers: &[P], g: f64, lateral_distance: bool) -> P {
    let mut y = 0.0;
    for &c in centers {
        let dy = me.p.1 - c.1;
        let d = if lateral_distance { dy.abs() } else { norm(sub(me.p, c)) };
        let sign = if dy > 0.0 {
            1.0
        } else if dy < 0.0 {
            -1.0
        } else {
            0.0
        };
        y += sign * (g - d).exp();
    }
    (0.0, y)
}

// Dubins words by circle/tangent geometry in world coordinates.

fn wrap(a: f64) -> f64 {
    a.rem_euclid(TAU)
}

/// Center of the turning circle on side `side` (+1 left, −1 right).
fn circle(p: P, h: f64, r: f64, side: f64) -> P {
    add(p, scale((-h.sin(), h.cos()), side * r))
}

/// Arc length turning from heading `from` to heading `to` on side `side`.
fn arc(from: f64, to: f64, r: f64, side: f64) -> f64 {
    if side > 0.0 {
        r * wrap(to - from)
    } else {
        r * wrap(from - to)
    }
}

fn csc(start: (P, f64), goal: (P, f64), r: f64, s1: f64, s2: f64) -> Option<f64> {
    let c1 = circle(start.0, start.1, r, s1);
    let c2 = circle(goal.0, goal.1, r, s2);
    let d = sub(c2, c1);
    let dist = norm(d);
    let (phi, straight) = if s1 == s2 {
        if dist == 0.0 {
            (start.1, 0.0)
        } else {
            (d.1.atan2(d.0), dist)
        }
    } else {
        if dist < 2.0 * r {
            return None;
        }
        let l = (dist * dist - 4.0 * r * r).max(0.0).sqrt();
        let k = 2.0 * s1 * r;
        let den = l * l + k * k;
        let ux = (l * d.0 - k * d.1) / den;
        let uy = (l * d.1 + k * d.0) / den;
        (uy.atan2(ux), l)
    };
    Some(arc(start.1, phi, r, s1) + straight + arc(phi, goal.1, r, s2))
}

/// Both placements of the middle circle; the shorter one is returned.
fn ccc(start: (P, f64), goal: (P, f64), r: f64, s: f64) -> Option<f64> {
    let c1 = circle(start.0, start.1, r, s);
    let c2 = circle(goal.0, goal.1, r, s);
    let d = sub(c2, c1);
    let dist = norm(d);
    if dist > 4.0 * r {
        return None;
    }
    let mid = scale(add(c1, c2), 0.5);
    let off = (4.0 * r * r - dist * dist / 4.0).max(0.0).sqrt();
    let perp = if dist > 0.0 {
        (-d.1 / dist, d.0 / dist)
    } else {
        (1.0, 0.0)
    };
    let heading_on = |center: P, point: P, side: f64| {
        // point = center − side·r·n(φ), n(φ) = (−sin φ, cos φ)
        let n = scale(sub(center, point), 1.0 / (side * r));
        (-n.0).atan2(n.1)
    };
    let mut best: Option<f64> = None;
    for sign in [1.0, -1.0] {
        let m = add(mid, scale(perp, sign * off));
        let q1 = scale(add(c1, m), 0.5);
        let q2 = scale(add(m, c2), 0.5);
        let phi1 = heading_on(c1, q1, s);
        let phi2 = heading_on(c2, q2, s);
        let len = arc(start.1, phi1, r, s) + arc(phi1, phi2, r, -s) + arc(phi2, goal.1, r, s);
        best = Some(best.map_or(len, |b: f64| b.min(len)));
    }
    best
}

/// Lengths of LSL, RSR, LSR, RSL, RLR, LRL in that order.
pub fn dubins_word_lengths(start: (P, f64), goal: (P, f64), r: f64) -> [Option<f64>; 6] {
    [
        csc(start, goal, r, 1.0, 1.0),
        csc(start, goal, r, -1.0, -1.0),
        csc(start, goal, r, 1.0, -1.0),
        csc(start, goal, r, -1.0, 1.0),
        ccc(start, goal, r, -1.0),
        ccc(start, goal, r, 1.0),
    ]
}
