// Wire envelopes: canonical JSON, one per WebSocket text message.
// Mirrors docs/protocol.md.

export type Kind =
  | "publish"
  | "subscribe"
  | "unsubscribe"
  | "service_request"
  | "service_response"
  | "error";

export interface Envelope {
  v: 1;
  kind: Kind;
  channel: string;
  id: string | null;
  stamp_wall: number;
  stamp_mono: number;
  payload: any;
}

export function makeEnvelope(kind: Kind, channel: string, payload: any = null, id: string | null = null): Envelope {
  return {
    v: 1,
    kind,
    channel,
    id,
    stamp_wall: Date.now() / 1000,
    stamp_mono: performance.now() / 1000,
    payload,
  };
}

export function encodeEnvelope(envelope: Envelope): string {
  return JSON.stringify(envelope);
}

export function decodeEnvelope(data: string): Envelope {
  const doc = JSON.parse(data);
  if (typeof doc !== "object" || doc === null || doc.v !== 1 || typeof doc.kind !== "string") {
    throw new Error("malformed envelope");
  }
  return doc as Envelope;
}
