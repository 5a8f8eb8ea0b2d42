// One WebSocket session to the console. Subscriptions are replayed on
// reconnect, and since all shared state arrives as snapshot-then-delta,
// the store rebuilds identically after every reconnect.

import { decodeEnvelope, encodeEnvelope, makeEnvelope, type Envelope } from "./protocol.js";
import type { Store } from "./store.js";

export interface SessionInfo {
  conn_id: string;
  role: string;
  can_configure: boolean;
}

type Pending = { resolve: (env: Envelope) => void; reject: (err: Error) => void };

export class Connection {
  private socket: WebSocket | null = null;
  private channels = new Set<string>();
  private pending = new Map<string, Pending>();
  private seq = 0;
  private retryMs = 500;
  onOpen: (() => void) | null = null;
  onClose: (() => void) | null = null;

  constructor(
    private url: string,
    private store: Store,
    private monoNow: () => number = () => performance.now() / 1000,
  ) {}

  connect(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryMs = 500;
      this.store.reset();
      for (const channel of this.channels) {
        socket.send(encodeEnvelope(makeEnvelope("subscribe", channel)));
      }
      this.onOpen?.();
    };
    socket.onmessage = (event) => {
      const envelope = decodeEnvelope(event.data as string);
      if ((envelope.kind === "service_response" || envelope.kind === "error") && envelope.id) {
        const waiter = this.pending.get(envelope.id);
        if (waiter) {
          this.pending.delete(envelope.id);
          if (envelope.kind === "error") {
            waiter.reject(new Error(envelope.payload?.message ?? envelope.payload?.error ?? "error"));
          } else {
            waiter.resolve(envelope);
          }
          return;
        }
      }
      this.store.apply(envelope, this.monoNow());
    };
    socket.onclose = () => {
      this.socket = null;
      for (const waiter of this.pending.values()) waiter.reject(new Error("connection lost"));
      this.pending.clear();
      this.onClose?.();
      setTimeout(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 5000);
    };
  }

  subscribeChannels(...channels: string[]): void {
    for (const channel of channels) {
      if (this.channels.has(channel)) continue;
      this.channels.add(channel);
      if (this.socket?.readyState === WebSocket.OPEN) {
        this.socket.send(encodeEnvelope(makeEnvelope("subscribe", channel)));
      }
    }
  }

  publish(channel: string, payload: any): void {
    if (this.socket?.readyState === WebSocket.OPEN) {
      this.socket.send(encodeEnvelope(makeEnvelope("publish", channel, payload)));
    }
  }

  call(channel: string, payload: any = {}): Promise<Envelope> {
    const socket = this.socket;
    if (!socket || socket.readyState !== WebSocket.OPEN) {
      return Promise.reject(new Error("not connected"));
    }
    const id = `ui${++this.seq}`;
    const promise = new Promise<Envelope>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      setTimeout(() => {
        if (this.pending.delete(id)) reject(new Error(`${channel}: timed out`));
      }, 6000);
    });
    socket.send(encodeEnvelope(makeEnvelope("service_request", channel, payload, id)));
    return promise;
  }
}
