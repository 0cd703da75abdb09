// Browser shell: binds a PerformerSession to the page. All state lives in
// the session; this file only re-renders on change and forwards clicks.

import { renderApp } from './render.js';
import { PerformerSession } from './session.js';
import { layoutScore, Row } from './timeline.js';

export function mount(root: HTMLElement, address: string): PerformerSession {
  const session = new PerformerSession(address);
  let rows: Row[] | null = null;

  const redraw = () => {
    if (!session.score) {
      const v = session.view();
      root.innerHTML = `<div class="banner">${v.banner ?? 'loading score'}</div>`;
      return;
    }
    rows = rows ?? layoutScore(session.score);
    root.innerHTML = renderApp(session.score, rows, session.observations,
                               session.view());
  };

  session.onChange(redraw);
  redraw();
  void session.connect();

  root.addEventListener('click', (ev) => {
    const el = ev.target as HTMLElement;
    const point = el.getAttribute('data-point');
    if (point) {
      session.trigger(point);
      return;
    }
    const transport = el.getAttribute('data-transport');
    if (transport === 'start' || transport === 'pause') {
      session.transport(transport);
      return;
    }
    const setVar = el.getAttribute('data-set');
    if (setVar) {
      const input = root.querySelector<HTMLInputElement>(`input[data-var="${setVar}"]`);
      if (input) session.setVariable(setVar, Number(input.value));
    }
  });

  return session;
}

declare global {
  interface Window { console_session?: PerformerSession }
}

const rootEl = typeof document !== 'undefined' ? document.getElementById('app') : null;
if (rootEl) {
  const params = new URLSearchParams(window.location.search);
  const address = params.get('addr') ?? window.location.host;
  window.console_session = mount(rootEl, address);
}
