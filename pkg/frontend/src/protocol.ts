// Wire types for the score engine's control protocol. The server speaks
// JSON text frames: one snapshot per time unit plus one ack per client
// message. The score document itself comes from GET /score on the same
// address. Everything the console displays is derived from these shapes.

export type ObjectState = 'waiting' | 'active' | 'done';
export type SessionState = 'ready' | 'running' | 'done' | 'aborted';

export interface ControlMessage {
  kind: 'start' | 'stop' | 'param';
  object: string;
  target?: string;
  value?: number;
}

export interface ObjectView {
  id: string;
  state: ObjectState;
  remaining: number | null;
}

export interface PendingPoint {
  id: string;
  kind: 'start-of' | 'duration-of' | 'delay-of';
  target: string;
  window: [number, number];
}

export interface Snapshot {
  tu: number; // -1 on the hello snapshot, before the first unit
  state: SessionState;
  objects: ObjectView[];
  pendingPoints: PendingPoint[];
  messages: ControlMessage[];
  flags: string[];
}

export interface Ack {
  ack: string; // kind of the client message being answered, or "error"
  status: 'accepted' | 'ignored' | 'error';
  reason?: string;
  point?: string; // trigger acks echo the point id
  var?: string; // set acks echo the variable name
  mode?: string; // transport acks report "running" or "paused"
}

// Client messages. These three builders are the only places the console
// produces wire traffic; every control maps to exactly one of them.

export interface TriggerMessage { trigger: string }
export interface SetMessage { set: { var: string; value: number } }
export interface TransportMessage { transport: 'start' | 'pause' }
export type ClientMessage = TriggerMessage | SetMessage | TransportMessage;

export function triggerMessage(pointId: string): TriggerMessage {
  return { trigger: pointId };
}

export function setMessage(name: string, value: number): SetMessage {
  return { set: { var: name, value } };
}

export function transportMessage(action: 'start' | 'pause'): TransportMessage {
  return { transport: action };
}

// Score document, to the depth the timeline needs.

export interface ScoreDuration {
  kind: 'fixed' | 'flexible';
  d?: number;
  dmin?: number;
  dmax?: number;
}

export interface ScoreObject {
  id: string;
  duration: ScoreDuration;
  params?: { offset: number; target: string; value: number }[];
}

export interface ScoreRelation {
  kind: 'precedence' | 'simultaneous' | 'duration';
  id?: string;
  from?: string;
  to?: string;
  delay?: [number, number];
  a?: string;
  b?: string;
}

export interface ScorePoint {
  id: string;
  binds: { kind: string; object?: string; relation?: string };
  window: [number, number];
}

export interface ScoreDoc {
  vars?: { name: string; lo: number; hi: number }[];
  objects: ScoreObject[];
  relations?: ScoreRelation[];
  points?: ScorePoint[];
  branches?: { at: string; arms: { condition: string; successor: string }[]; default?: string }[];
  roots: string[];
  horizon: number;
}

// Parsing. Incoming frames are untrusted; a frame that fails these checks
// is reported, never rendered.

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === 'object' && x !== null && !Array.isArray(x);
}

const OBJECT_STATES = ['waiting', 'active', 'done'];
const SESSION_STATES = ['ready', 'running', 'done', 'aborted'];
const ACK_STATUSES = ['accepted', 'ignored', 'error'];

function isControlMessage(x: unknown): x is ControlMessage {
  if (!isRecord(x)) return false;
  if (typeof x.object !== 'string') return false;
  if (x.kind === 'start' || x.kind === 'stop') return true;
  return x.kind === 'param' && typeof x.target === 'string' && typeof x.value === 'number';
}

function isObjectView(x: unknown): x is ObjectView {
  return isRecord(x) && typeof x.id === 'string'
    && OBJECT_STATES.includes(x.state as string)
    && (x.remaining === null || typeof x.remaining === 'number');
}

function isPendingPoint(x: unknown): x is PendingPoint {
  return isRecord(x) && typeof x.id === 'string'
    && typeof x.kind === 'string' && typeof x.target === 'string'
    && Array.isArray(x.window) && x.window.length === 2
    && x.window.every((w) => typeof w === 'number');
}

export function isSnapshot(x: unknown): x is Snapshot {
  return isRecord(x)
    && typeof x.tu === 'number'
    && SESSION_STATES.includes(x.state as string)
    && Array.isArray(x.objects) && x.objects.every(isObjectView)
    && Array.isArray(x.pendingPoints) && x.pendingPoints.every(isPendingPoint)
    && Array.isArray(x.messages) && x.messages.every(isControlMessage)
    && Array.isArray(x.flags) && x.flags.every((f) => typeof f === 'string');
}

export function isAck(x: unknown): x is Ack {
  return isRecord(x) && typeof x.ack === 'string'
    && ACK_STATUSES.includes(x.status as string)
    && (x.reason === undefined || typeof x.reason === 'string')
    && (x.point === undefined || typeof x.point === 'string')
    && (x.var === undefined || typeof x.var === 'string');
}

// Conformance check for outbound traffic, used by the protocol-recording
// proxy test: accepts exactly the documented client messages.
export function isClientMessage(x: unknown): x is ClientMessage {
  if (!isRecord(x)) return false;
  const keys = Object.keys(x);
  if (keys.length !== 1) return false;
  if (keys[0] === 'trigger') return typeof x.trigger === 'string';
  if (keys[0] === 'transport') return x.transport === 'start' || x.transport === 'pause';
  if (keys[0] === 'set') {
    const s = x.set;
    return isRecord(s) && Object.keys(s).length === 2
      && typeof s.var === 'string' && typeof s.value === 'number';
  }
  return false;
}

export type ServerFrame =
  | { kind: 'snapshot'; snapshot: Snapshot }
  | { kind: 'ack'; ack: Ack }
  | { kind: 'garbage'; raw: string };

export function parseServerFrame(data: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(data);
  } catch {
    return { kind: 'garbage', raw: data };
  }
  if (isSnapshot(doc)) return { kind: 'snapshot', snapshot: doc };
  if (isAck(doc)) return { kind: 'ack', ack: doc };
  return { kind: 'garbage', raw: data };
}

export function parseScoreDoc(doc: unknown): ScoreDoc {
  if (!isRecord(doc) || !Array.isArray(doc.objects) || !Array.isArray(doc.roots)
      || typeof doc.horizon !== 'number') {
    throw new Error('not a score document');
  }
  return doc as unknown as ScoreDoc;
}
