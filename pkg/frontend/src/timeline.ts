// Timeline layout. The static pass turns the score document into one row
// per object with a start range and a duration range; live observations
// collapse those ranges as the run pins them down. Flexible starts stay
// ranges until the object is actually seen running.
//
// Scheduling conventions mirrored from the engine:
//   an object starting at s with duration d occupies units s..s+d-1;
//   precedence delay counts from the predecessor's last active unit;
//   a start-of point with window [w0,w1] yields a start in [w0+1, w1]
//   (trigger takes effect one unit later, the window forces at w1);
//   branch successors launch the unit after the source object ends.

import type { ScoreDoc, Snapshot } from './protocol.js';

export interface Row {
  id: string;
  start: [number, number]; // earliest, latest
  dur: [number, number];
  placed: boolean; // false when only reachable through an unresolved branch
}

export interface Observation {
  start: number; // first unit the object was displayed active
  end: number | null; // last active unit, once done
}

export function layoutScore(score: ScoreDoc): Row[] {
  const horizon = score.horizon;
  const rows = new Map<string, Row>();
  for (const o of score.objects) {
    const d = o.duration;
    const dur: [number, number] = d.kind === 'fixed'
      ? [d.d ?? 1, d.d ?? 1]
      : [d.dmin ?? 1, d.dmax ?? 1];
    rows.set(o.id, { id: o.id, start: [0, horizon], dur, placed: false });
  }

  const startPoint = new Map<string, [number, number]>();
  for (const p of score.points ?? []) {
    if (p.binds.kind === 'start-of' && p.binds.object) {
      startPoint.set(p.binds.object, p.window);
    }
  }

  const place = (id: string, e: number, l: number): boolean => {
    const row = rows.get(id);
    if (!row) return false;
    e = Math.max(0, Math.min(e, horizon));
    l = Math.max(e, Math.min(l, horizon));
    if (row.placed) {
      // widen: an object reachable several ways may start at any of them
      const ne = Math.min(row.start[0], e);
      const nl = Math.max(row.start[1], l);
      if (ne === row.start[0] && nl === row.start[1]) return false;
      row.start = [ne, nl];
      return true;
    }
    row.placed = true;
    row.start = [e, l];
    return true;
  };

  for (const rt of score.roots) {
    const w = startPoint.get(rt);
    if (w) place(rt, w[0] + 1, w[1]);
    else place(rt, 0, 0);
  }

  // relax precedence, simultaneity and branch edges to a fixpoint; ranges
  // are clamped to [0, horizon] so loops converge
  let changed = true;
  let guard = 0;
  while (changed && guard++ < score.objects.length * 4 + 8) {
    changed = false;
    for (const r of score.relations ?? []) {
      if (r.kind === 'precedence' && r.from && r.to) {
        const from = rows.get(r.from);
        if (!from || !from.placed) continue;
        const [d0, d1] = r.delay ?? [0, 0];
        const e = from.start[0] + from.dur[0] - 1 + d0;
        const l = from.start[1] + from.dur[1] - 1 + d1;
        if (place(r.to, e, l)) changed = true;
      } else if (r.kind === 'simultaneous' && r.a && r.b) {
        const a = rows.get(r.a);
        const b = rows.get(r.b);
        if (a?.placed && place(r.b, a.start[0], a.start[1])) changed = true;
        if (b?.placed && place(r.a, b.start[0], b.start[1])) changed = true;
      }
    }
    for (const br of score.branches ?? []) {
      const src = rows.get(br.at);
      if (!src || !src.placed) continue;
      const e = src.start[0] + src.dur[0];
      const targets = br.arms.map((a) => a.successor);
      if (br.default) targets.push(br.default);
      for (const t of targets) {
        // which arm wins is a run-time fact; only the earliest is known
        if (place(t, e, horizon)) changed = true;
      }
    }
  }

  return score.objects.map((o) => rows.get(o.id)!);
}

// Live observations: note when each object is first seen active and when
// it settles done. Derived from snapshots alone.
export function observe(obs: Map<string, Observation>, snap: Snapshot): void {
  for (const o of snap.objects) {
    const seen = obs.get(o.id);
    if (o.state === 'active' && !seen) {
      obs.set(o.id, { start: snap.tu, end: null });
    } else if (o.state === 'done' && seen && seen.end === null) {
      obs.set(o.id, { ...seen, end: snap.tu - 1 });
    }
  }
}

export interface Span {
  id: string;
  from: number;
  to: number; // inclusive last unit
  exactStart: boolean;
  exactEnd: boolean;
  placed: boolean;
}

// A row's displayed span: observed facts override the static range.
export function spanOf(row: Row, obs: Observation | undefined): Span {
  if (obs) {
    const to = obs.end !== null ? obs.end : obs.start + row.dur[1] - 1;
    return { id: row.id, from: obs.start, to, exactStart: true,
             exactEnd: obs.end !== null, placed: true };
  }
  return {
    id: row.id,
    from: row.start[0],
    to: row.start[1] + row.dur[1] - 1,
    exactStart: row.start[0] === row.start[1],
    exactEnd: row.start[0] === row.start[1] && row.dur[0] === row.dur[1],
    placed: row.placed,
  };
}
