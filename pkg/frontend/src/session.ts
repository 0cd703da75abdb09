// Live session binding. Owns one WebSocket to the engine, mirrors its
// snapshots, and turns the three console controls into the three
// documented client messages. The console never advances state on its
// own: everything rendered comes from the last snapshot (plus first-seen
// observations used to pin the timeline).

import {
  Ack,
  ClientMessage,
  ControlMessage,
  parseScoreDoc,
  parseServerFrame,
  ScoreDoc,
  setMessage,
  Snapshot,
  transportMessage,
  triggerMessage,
} from './protocol.js';
import { Observation, observe } from './timeline.js';

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SessionOptions {
  socketFactory?: (url: string) => SocketLike;
  fetchFn?: (url: string) => Promise<{ ok: boolean; json(): Promise<unknown> }>;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
  reconnectBaseMs?: number;
  reconnectCapMs?: number;
  feedLimit?: number;
}

export type Phase = 'connecting' | 'live' | 'reconnecting' | 'closed';

export interface SessionView {
  phase: Phase;
  banner: string | null;
  tu: number;
  state: Snapshot['state'] | 'unknown';
  objects: Snapshot['objects'];
  pendingPoints: Snapshot['pendingPoints'];
  messageFeed: ControlMessage[];
  inFlight: string[]; // point ids sent but not yet reflected by a snapshot
}

function defaultSocketFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

export class PerformerSession {
  readonly httpBase: string;
  readonly wsUrl: string;

  score: ScoreDoc | null = null;
  private snap: Snapshot | null = null;
  private feed: ControlMessage[] = [];
  readonly observations = new Map<string, Observation>();

  private phase: Phase = 'connecting';
  private banner: string | null = null;
  private inFlight = new Set<string>();

  private sock: SocketLike | null = null;
  private attempts = 0;
  private timer: unknown = null;
  private closed = false;
  private listeners = new Set<() => void>();

  private readonly makeSocket: (url: string) => SocketLike;
  private readonly fetchFn: NonNullable<SessionOptions['fetchFn']>;
  private readonly schedule: NonNullable<SessionOptions['schedule']>;
  private readonly cancel: NonNullable<SessionOptions['cancel']>;
  private readonly baseMs: number;
  private readonly capMs: number;
  private readonly feedLimit: number;

  constructor(address: string, opts: SessionOptions = {}) {
    const bare = address.replace(/^(ws|http)s?:\/\//, '').replace(/\/.*$/, '');
    this.httpBase = `http://${bare}`;
    this.wsUrl = `ws://${bare}`;
    this.makeSocket = opts.socketFactory ?? defaultSocketFactory;
    this.fetchFn = opts.fetchFn ?? ((url) => fetch(url));
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.cancel = opts.cancel ?? ((h) => clearTimeout(h as never));
    this.baseMs = opts.reconnectBaseMs ?? 1000;
    this.capMs = opts.reconnectCapMs ?? 30000;
    this.feedLimit = opts.feedLimit ?? 50;
  }

  onChange(fn: () => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    this.listeners.forEach((fn) => fn());
  }

  async connect(): Promise<void> {
    if (this.closed) return;
    if (!this.score) {
      try {
        const resp = await this.fetchFn(`${this.httpBase}/score`);
        if (!resp.ok) throw new Error('score fetch failed');
        this.score = parseScoreDoc(await resp.json());
      } catch (err) {
        this.banner = `cannot load score: ${String(err)}`;
        this.scheduleReconnect();
        this.notify();
        return;
      }
    }
    this.open();
  }

  private open(): void {
    const sock = this.makeSocket(this.wsUrl);
    this.sock = sock;
    sock.onopen = () => {
      this.attempts = 0;
      this.phase = 'live';
      this.banner = null;
      this.notify();
    };
    sock.onmessage = (ev) => this.handleFrame(String(ev.data));
    sock.onerror = () => { /* onclose follows and carries the retry */ };
    sock.onclose = () => {
      if (this.closed || this.sock !== sock) return;
      this.scheduleReconnect();
      this.notify();
    };
  }

  private scheduleReconnect(): void {
    this.phase = 'reconnecting';
    this.banner = 'connection lost, reconnecting';
    const wait = Math.min(this.baseMs * 2 ** this.attempts, this.capMs);
    this.attempts += 1;
    this.timer = this.schedule(() => { void this.connect(); }, wait);
  }

  private handleFrame(data: string): void {
    const frame = parseServerFrame(data);
    if (frame.kind === 'snapshot') {
      this.snap = frame.snapshot;
      observe(this.observations, frame.snapshot);
      if (frame.snapshot.messages.length) {
        this.feed = this.feed.concat(frame.snapshot.messages).slice(-this.feedLimit);
      }
      this.inFlight.clear(); // whatever we sent is now reflected or moot
    } else if (frame.kind === 'ack') {
      this.handleAck(frame.ack);
    } else {
      this.banner = 'unrecognized server frame';
    }
    this.notify();
  }

  private handleAck(ack: Ack): void {
    if (ack.status === 'accepted') return;
    const what = [ack.ack, ack.point ?? ack.var].filter(Boolean).join(' ');
    const why = ack.reason ? `: ${ack.reason}` : '';
    this.banner = `${ack.status}${why} (${what})`;
    // a rejected trigger will never show up in a snapshot; re-enable it
    if (ack.ack === 'trigger' && ack.point !== undefined) {
      this.inFlight.delete(ack.point);
    }
  }

  private send(msg: ClientMessage): boolean {
    if (this.phase !== 'live' || !this.sock) return false;
    this.sock.send(JSON.stringify(msg));
    return true;
  }

  // controls: exactly one wire message each ------------------------------

  trigger(pointId: string): boolean {
    const pending = this.snap?.pendingPoints.some((p) => p.id === pointId);
    if (!pending || this.inFlight.has(pointId)) return false;
    if (!this.send(triggerMessage(pointId))) return false;
    this.inFlight.add(pointId);
    this.notify();
    return true;
  }

  setVariable(name: string, value: number): boolean {
    return this.send(setMessage(name, value));
  }

  transport(action: 'start' | 'pause'): boolean {
    return this.send(transportMessage(action));
  }

  // observation -----------------------------------------------------------

  view(): SessionView {
    return {
      phase: this.phase,
      banner: this.banner,
      tu: this.snap?.tu ?? -1,
      state: this.snap?.state ?? 'unknown',
      objects: this.snap?.objects ?? [],
      pendingPoints: this.snap?.pendingPoints ?? [],
      messageFeed: this.feed.slice(),
      inFlight: [...this.inFlight],
    };
  }

  close(): void {
    this.closed = true;
    this.phase = 'closed';
    if (this.timer !== null) this.cancel(this.timer);
    this.sock?.close();
    this.notify();
  }
}
