// Rendering. Pure functions from (score, layout, view) to HTML strings;
// no DOM access and no state, so a view renders the same way every time.
// The browser shell (app.ts) swaps the result in and wires clicks by
// data attributes.

import type { ControlMessage, ScoreDoc } from './protocol.js';
import type { SessionView } from './session.js';
import { Row, spanOf } from './timeline.js';
import type { Observation } from './timeline.js';

export function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function pct(unit: number, horizon: number): string {
  const clamped = Math.max(0, Math.min(unit, horizon));
  return ((clamped / horizon) * 100).toFixed(3) + '%';
}

export function renderTimeline(rows: Row[], obs: Map<string, Observation>,
                               view: SessionView, horizon: number): string {
  const stateOf = new Map(view.objects.map((o) => [o.id, o.state]));
  const lines = rows.map((row) => {
    const span = spanOf(row, obs.get(row.id));
    const state = stateOf.get(row.id) ?? 'waiting';
    const left = pct(span.from, horizon);
    const width = pct(span.to - span.from + 1, horizon);
    const ranged = span.exactStart ? '' : ' ranged';
    const title = span.exactStart
      ? `${row.id}: ${span.from}..${span.to}`
      : `${row.id}: starts ${row.start[0]}..${row.start[1]}`;
    return `<div class="lane" data-object="${esc(row.id)}" data-state="${state}">`
      + `<span class="lane-label">${esc(row.id)}</span>`
      + `<span class="bar${ranged}" style="left:${left};width:${width}" title="${esc(title)}"></span>`
      + `</div>`;
  });
  const playhead = view.tu >= 0
    ? `<div class="playhead" style="left:${pct(view.tu, horizon)}"></div>`
    : '';
  return `<div class="timeline">${playhead}${lines.join('')}</div>`;
}

export function renderObjects(view: SessionView): string {
  const items = view.objects.map((o) => {
    const rem = o.remaining !== null ? ` (${o.remaining} left)` : '';
    return `<li data-object="${esc(o.id)}" data-state="${o.state}">`
      + `${esc(o.id)}: ${o.state}${rem}</li>`;
  });
  return `<ul class="objects">${items.join('')}</ul>`;
}

export function renderPoints(view: SessionView): string {
  if (!view.pendingPoints.length) {
    return '<div class="points empty">no open interaction points</div>';
  }
  const buttons = view.pendingPoints.map((p) => {
    const busy = view.inFlight.includes(p.id);
    const dis = busy || view.phase !== 'live' ? ' disabled' : '';
    return `<button data-point="${esc(p.id)}"${dis}>`
      + `${esc(p.id)} &rarr; ${esc(p.kind)} ${esc(p.target)} `
      + `[${p.window[0]},${p.window[1]}]</button>`;
  });
  return `<div class="points">${buttons.join('')}</div>`;
}

export function renderVars(score: ScoreDoc, view: SessionView): string {
  const vars = score.vars ?? [];
  if (!vars.length) return '';
  const dis = view.phase !== 'live' ? ' disabled' : '';
  const fields = vars.map((v) =>
    `<label>${esc(v.name)} [${v.lo}..${v.hi}] `
    + `<input type="number" data-var="${esc(v.name)}" min="${v.lo}" max="${v.hi}" value="${v.lo}"${dis}>`
    + `</label><button data-set="${esc(v.name)}"${dis}>set</button>`);
  return `<div class="vars">${fields.join('')}</div>`;
}

export function renderTransport(view: SessionView): string {
  const dis = view.phase !== 'live' ? ' disabled' : '';
  return `<div class="transport">`
    + `<button data-transport="start"${dis}>start</button>`
    + `<button data-transport="pause"${dis}>pause</button>`
    + `<span class="tu">tu ${view.tu}</span>`
    + `<span class="state">${esc(view.state)}</span>`
    + `</div>`;
}

function renderMessage(m: ControlMessage): string {
  const body = m.kind === 'param'
    ? `${m.object}.${m.target ?? ''} = ${m.value ?? ''}`
    : `${m.kind} ${m.object}`;
  return `<li class="msg ${m.kind}">${esc(body)}</li>`;
}

export function renderFeed(view: SessionView): string {
  const recent = view.messageFeed.slice(-12).reverse();
  return `<ul class="feed">${recent.map(renderMessage).join('')}</ul>`;
}

export function renderBanner(view: SessionView): string {
  if (view.phase === 'reconnecting') {
    return `<div class="banner warn">${esc(view.banner ?? 'reconnecting')}</div>`;
  }
  if (view.banner) return `<div class="banner">${esc(view.banner)}</div>`;
  return '';
}

export function renderApp(score: ScoreDoc, rows: Row[],
                          obs: Map<string, Observation>,
                          view: SessionView): string {
  return renderBanner(view)
    + renderTransport(view)
    + renderTimeline(rows, obs, view, score.horizon)
    + renderPoints(view)
    + renderVars(score, view)
    + renderObjects(view)
    + renderFeed(view);
}
