// Thin client for the gateway's documented JSON API; the UI talks to
// nothing else.

import { TxEnvelope, txIdOf } from "./tx.js";

export interface EventRecord {
  uid: string;
  dtstart: number;
  dtend: number;
  summary: string;
  description: string;
  organizer: string;
  dtstamp: number;
}

export interface AccessInfo {
  level: "none" | "read" | "write" | "admin";
  not_before: number | null;
  not_after: number | null;
}

export interface GrantRow {
  account: string;
  level: string;
  not_before: number | null;
  not_after: number | null;
}

export interface TxStatus {
  tx_id: string;
  status: "pending" | "included" | "rejected" | "unknown";
  height?: number;
  ok?: boolean;
  error?: string | null;
  value?: unknown;
}

export class GatewayError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class Gateway {
  constructor(private base: string = "", private fetchFn: FetchLike = (u, i) => fetch(u, i)) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = body as { error?: string; message?: string };
      throw new GatewayError(err.error ?? "http_error", err.message ?? response.statusText, response.status);
    }
    return body;
  }

  events(contract: string, user: string): Promise<EventRecord[]> {
    return this.request(`/api/events?contract=${contract}&user=${user}`) as Promise<EventRecord[]>;
  }

  access(contract: string, user: string): Promise<AccessInfo> {
    return this.request(`/api/access?contract=${contract}&user=${user}`) as Promise<AccessInfo>;
  }

  grants(contract: string, user: string): Promise<GrantRow[]> {
    return this.request(`/api/grants?contract=${contract}&user=${user}`) as Promise<GrantRow[]>;
  }

  account(address: string): Promise<{ nonce: number; balance: number; next_nonce: number }> {
    return this.request(`/api/account?address=${address}`) as Promise<{
      nonce: number; balance: number; next_nonce: number;
    }>;
  }

  contracts(): Promise<{ address: string; kind: string; owner: string }[]> {
    return this.request("/api/contracts") as Promise<{ address: string; kind: string; owner: string }[]>;
  }

  head(): Promise<{ height: number; state_digest: string; time: number }> {
    return this.request("/api/chain/head") as Promise<{ height: number; state_digest: string; time: number }>;
  }

  async submit(envelope: TxEnvelope): Promise<string> {
    const receipt = (await this.request("/api/tx", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(envelope),
    })) as { tx_id: string };
    return receipt.tx_id;
  }

  txStatus(txId: string): Promise<TxStatus> {
    return this.request(`/api/tx/${txId}`) as Promise<TxStatus>;
  }

  /** Submit and poll until the transaction leaves the pending state. */
  async submitAndWait(envelope: TxEnvelope, attempts = 40, delayMs = 100): Promise<TxStatus> {
    const txId = await this.submit(envelope).catch((err) => {
      if (err instanceof GatewayError) {
        return Promise.reject(err);
      }
      throw err;
    });
    let status: TxStatus = { tx_id: txId, status: "pending" };
    for (let i = 0; i < attempts; i++) {
      status = await this.txStatus(txId);
      if (status.status !== "pending") {
        return status;
      }
      await new Promise((resolve) => setTimeout(resolve, delayMs));
    }
    return status;
  }

  feedUrl(contract: string, user: string): string {
    return `${this.base}/feed/${contract}/${user}.ics`;
  }

  expectedTxId(envelope: TxEnvelope): string {
    return txIdOf(envelope);
  }
}
