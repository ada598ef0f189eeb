use std::collections::BTreeSet;

use plangeo_core::algebra::{select_min_dep, solve_system, Domain, Poly, TieBreak, Value, TARGET};
use plangeo_core::gpl::{execute_branch, join, reorder_branch, to_dnf, union_rel, Relation};
use plangeo_core::par::Exec;
use plangeo_core::point::{PointSeq, Var};
use plangeo_core::topology::{compose_sets, construct_all, multi_repr, TsiSet};
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;

fn compose(a: &TsiSet, b: &TsiSet) -> Result<TsiSet, String> {
    compose_sets(a, b).ok_or_else(|| format!("{:?} and {:?} do not compose", a.canonical(), b.canonical()))
}

fn closed(s: &TsiSet, len: usize) -> Result<(), String> {
    if reps(s) != rotation_set(s.canonical()) || s.canonical().len() != len {
        return Err(format!("{:?} is not a rotation class of length {len}", s.canonical()));
    }
    Ok(())
}

/// One adjacent pair and, when the partition has one, a path of three
/// faces: closure, commutativity and associativity against the union
/// boundary. Returns whether a triple was checked.
pub fn topology_case<R: Rng>(rng: &mut R) -> Result<bool, String> {
    let vertices = rng.gen_range(5..=10);
    let max_faces = rng.gen_range(2..=5);
    let faces = convex_partition(rng, vertices, max_faces);
    let n = faces.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && adjacent(&faces[i], &faces[j])).collect();
    let &(i, j) = pairs.choose(rng).ok_or("partition without adjacent faces")?;
    let (a, b) = (multi_repr(&faces[i]), multi_repr(&faces[j]));
    let ab = compose(&a, &b)?;
    let ba = compose(&b, &a)?;
    if reps(&ab) != reps(&ba) {
        return Err(format!("not commutative on {:?} {:?}", faces[i], faces[j]));
    }
    let want = union_boundary(&[&faces[i], &faces[j]]).ok_or("pair union is not simple")?;
    if reps(&ab) != rotation_set(&want) {
        return Err(format!("{:?} + {:?} gave {:?}, expected {want:?}", faces[i], faces[j], ab.canonical()));
    }
    closed(&ab, faces[i].len() + faces[j].len() - 2)?;

    let paths: Vec<(usize, usize, usize)> = pairs
        .iter()
        .flat_map(|&(x, y)| pairs.iter().filter(move |&&(p, z)| p == y && z != x).map(move |&(_, z)| (x, y, z)))
        .collect();
    let Some(&(x, y, z)) = paths.choose(rng) else { return Ok(false) };
    let (a, b, c) = (multi_repr(&faces[x]), multi_repr(&faces[y]), multi_repr(&faces[z]));
    let left = compose(&compose(&a, &b)?, &c)?;
    let right = compose(&a, &compose(&b, &c)?)?;
    let want = union_boundary(&[&faces[x], &faces[y], &faces[z]]).ok_or("triple union is not simple")?;
    if reps(&left) != reps(&right) || reps(&left) != rotation_set(&want) {
        return Err(format!("not associative on {:?} {:?} {:?}", faces[x], faces[y], faces[z]));
    }
    closed(&left, want.len())?;
    Ok(true)
}

fn shape_sets(shapes: &[TsiSet]) -> BTreeSet<BTreeSet<PointSeq>> {
    shapes.iter().map(reps).collect()
}

/// A diagram of at most six units built in `orders` random orders, each
/// compared with the first and with every connected union of units.
pub fn order_case<R: Rng>(rng: &mut R, orders: usize) -> Result<(), String> {
    let vertices = rng.gen_range(4..=10);
    let max_faces = rng.gen_range(1..=6);
    let faces = convex_partition(rng, vertices, max_faces);
    let want = connected_unions(&faces);
    let mut units: Vec<TsiSet> = faces.iter().map(|f| multi_repr(f)).collect();
    for k in 0..orders {
        units.shuffle(rng);
        let exec = if k % 2 == 0 { Exec::Sequential } else { Exec::default() };
        let got = shape_sets(&construct_all(&units, exec));
        if got != want {
            return Err(format!("order {k} of {faces:?}: {} shapes, expected {}", got.len(), want.len()));
        }
    }
    Ok(())
}

const VARS: [Var; 3] = [Point(b'A'), Point(b'B'), Point(b'C')];

/// Join against nested loops, then the three laws, on random relations of
/// at most five elements over at most three variables.
pub fn gpl_law_case<R: Rng>(rng: &mut R) -> Result<(), String> {
    let pts = universe(rng.gen_range(3..=5));
    let r1 = random_relation(rng, &VARS, &pts, 5);
    let r2 = random_relation(rng, &VARS, &pts, 5);
    let r3 = random_relation(rng, &VARS, &pts, 5);
    let (m1, m2, m3) = (as_maps(&r1), as_maps(&r2), as_maps(&r3));

    let j12 = join(&r1, &r2);
    if as_maps(&j12) != nested_loop_join(&m1, &m2) {
        return Err(format!("join differs from nested loops: {r1:?} {r2:?}"));
    }
    if as_maps(&j12) != as_maps(&join(&r2, &r1)) {
        return Err("& is not commutative".into());
    }
    let left = join(&j12, &r3);
    let right = join(&r1, &join(&r2, &r3));
    if as_maps(&left) != as_maps(&right) || as_maps(&left) != nested_loop_join(&nested_loop_join(&m1, &m2), &m3) {
        return Err("& is not associative".into());
    }

    let r3b = Relation::from_tuples(r2.vars.clone(), random_tuples(rng, r2.vars.len(), &pts, 5));
    let either = union_rel(&r2, &r3b).map_err(|e| e.to_string())?;
    let lhs = join(&r1, &either);
    let rhs = union_rel(&join(&r1, &r2), &join(&r1, &r3b)).map_err(|e| e.to_string())?;
    let mut oracle = as_maps(&r2);
    oracle.extend(as_maps(&r3b));
    if as_maps(&lhs) != as_maps(&rhs) || as_maps(&lhs) != nested_loop_join(&m1, &oracle) {
        return Err("& does not distribute over |".into());
    }
    Ok(())
}

pub const ARITIES: [usize; 6] = [1, 1, 2, 2, 3, 3];

/// A random premise of depth at most `max_depth`: its DNF evaluates like
/// the expression, and every reordered branch executes to exactly the
/// brute-force assignments of that branch.
pub fn dnf_case<R: Rng>(rng: &mut R, max_depth: usize) -> Result<(), String> {
    let pts = universe(rng.gen_range(3..=4));
    let tables = random_tables(rng, &ARITIES, &pts, 5);
    let mut vars = VARS.to_vec();
    vars.shuffle(rng);
    vars.truncate(rng.gen_range(1..=3));
    let depth = rng.gen_range(1..=max_depth);
    let expr = random_premise(rng, &ARITIES, &vars, depth);
    let branches = to_dnf(&expr).map_err(|e| format!("{expr}: {e}"))?;

    let direct: BTreeSet<Assignment> =
        tables.brute_force(&vars, &[]).into_iter().filter(|a| tables.eval(&expr, a)).collect();
    let mut via_branches = BTreeSet::new();
    let mut executed = BTreeSet::new();
    for b in &branches {
        via_branches.extend(tables.brute_force(&vars, b));
        let ordered = reorder_branch(b, None);
        let mut x = ordered.clone();
        let mut y = b.clone();
        x.sort_by_key(|a| a.to_string());
        y.sort_by_key(|a| a.to_string());
        if x != y {
            return Err(format!("reordering changed the atoms of {expr}"));
        }
        let out = execute_branch(&ordered, &tables, None, Exec::Sequential).map_err(|e| e.to_string())?;
        let got = as_maps(&out.relation);
        let want = tables.brute_force(&vars, b);
        if got != want {
            return Err(format!("branch {b:?} of {expr}: executed {got:?}, brute force {want:?}"));
        }
        executed.extend(got);
    }
    if direct != via_branches || direct != executed {
        return Err(format!("{expr}: DNF changes the result set"));
    }
    Ok(())
}

pub struct MinDep {
    pub determined: bool,
    pub selected: usize,
    pub full: usize,
}

/// A random consistent linear system: the selected subset reproduces the
/// oracle value, and selection stops only as its rule allows.
pub fn min_dep_case<R: Rng>(rng: &mut R) -> Result<MinDep, String> {
    let n = rng.gen_range(1..=10);
    let m = rng.gen_range(1..=12);
    let solution: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
    let name = |i: usize| format!("x{i}");
    let cols = n + 1;
    let mut polys = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    for _ in 0..m {
        let k = rng.gen_range(1..=3.min(n));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let mut row = vec![rat(0); cols];
        let mut p = Poly::zero();
        let mut rhs = 0;
        for &i in &idx[..k] {
            let c = *[-3i64, -2, -1, 1, 2, 3, 4, 5].choose(rng).unwrap();
            row[i] = rat(c);
            rhs += c * solution[i];
            p = p.add(&Poly::sym(&name(i)).scale(&Value::int(c)));
        }
        polys.push(p.sub(&Poly::constant(Value::int(rhs))));
        rows.push(row);
    }
    let mut target_row = vec![rat(0); cols];
    target_row[n] = rat(1);
    let mut a = Poly::zero();
    let mut oracle = 0i64;
    if rng.gen_bool(0.9) {
        for _ in 0..rng.gen_range(1..=3) {
            let i = rng.gen_range(0..n);
            let c = rng.gen_range(1..=3);
            target_row[i] -= rat(c);
            oracle += c * solution[i];
            a = a.add(&Poly::sym(&name(i)).scale(&Value::int(c)));
        }
    } else {
        oracle = rng.gen_range(-5..=5);
        a = Poly::constant(Value::int(oracle));
    }
    let target = Poly::sym(TARGET).sub(&a);

    let x_rows: Vec<Row> = rows.iter().map(|r| r[..n].to_vec()).collect();
    let mut with_target = x_rows.clone();
    with_target.push(target_row[..n].iter().map(|v| -v).collect());
    let determined = rank(&x_rows) == rank(&with_target);

    let sel = select_min_dep(&target, &polys, TieBreak::Lowest);
    let distinct: BTreeSet<usize> = sel.iter().copied().collect();
    if distinct.len() != sel.len() || sel.len() > m {
        return Err(format!("selection {sel:?} repeats or exceeds {m} equations"));
    }
    let mut system = vec![target.clone()];
    system.extend(sel.iter().map(|&i| polys[i].clone()));
    let found = solve_system(&system, &|_| Domain::Real, None).map_err(|_| "solver timed out")?;
    let got = found.get(TARGET);
    match (determined, got) {
        (true, Some(v)) if v.as_rational() == Some(&rat(oracle)) => {}
        (false, None) => {}
        (d, g) => return Err(format!("determined={d}, oracle {oracle}, subset gave {g:?}")),
    }

    let mut unknowns: BTreeSet<String> = target.syms();
    for &i in &sel {
        unknowns.extend(polys[i].syms());
    }
    if unknowns.len() != sel.len() + 1 {
        let mut basis: Vec<Row> = vec![target_row.clone()];
        basis.extend(sel.iter().map(|&i| rows[i].clone()));
        let r = rank(&basis);
        for j in (0..m).filter(|j| !distinct.contains(j)) {
            if polys[j].syms().is_disjoint(&unknowns) {
                continue;
            }
            let mut more = basis.clone();
            more.push(rows[j].clone());
            if rank(&more) > r {
                return Err(format!("stopped early: equation {j} still qualifies"));
            }
        }
    }
    Ok(MinDep { determined, selected: sel.len(), full: m })
}
