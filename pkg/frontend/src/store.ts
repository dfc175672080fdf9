// Client-side event state with optimistic writes.
//
// A created event is shown immediately. If the ledger later rejects it,
// the entry stays on the local client, flagged with a warning, until the
// next full reload (the browser-refresh semantics); confirmed entries
// always mirror the gateway exactly.

import { EventRecord, Gateway, GatewayError, TxStatus } from "./gateway.js";
import { TxFields, signTx } from "./tx.js";
import { Wallet } from "./wallet.js";

export type EntryState = "confirmed" | "pending" | "rejected";

export interface EventEntry extends EventRecord {
  state: EntryState;
  warning?: string;
}

export interface CreateArgs {
  dtstart: number;
  dtend: number;
  summary: string;
  description: string;
}

let localCounter = 0;

export class EventStore {
  entries: EventEntry[] = [];
  onChange: () => void = () => {};

  constructor(
    private gateway: Gateway,
    private wallet: Wallet,
    public contract: string,
  ) {}

  private emit() {
    this.onChange();
  }

  private async signed(op: string, args: TxFields["args"]): Promise<TxStatus> {
    const account = await this.gateway.account(this.wallet.address);
    const envelope = signTx(this.wallet, {
      nonce: account.next_nonce,
      target: this.contract,
      op,
      args,
    });
    return this.gateway.submitAndWait(envelope);
  }

  /** Browser-refresh semantics: local-only entries are dropped. */
  async reload(): Promise<void> {
    const events = await this.gateway.events(this.contract, this.wallet.address);
    this.entries = events.map((e) => ({ ...e, state: "confirmed" as const }));
    this.emit();
  }

  /** Re-sync confirmed entries while keeping warned local-only ones. */
  async sync(): Promise<void> {
    const events = await this.gateway.events(this.contract, this.wallet.address);
    const kept = this.entries.filter((e) => e.state === "rejected");
    this.entries = [...events.map((e) => ({ ...e, state: "confirmed" as const })), ...kept];
    this.emit();
  }

  /** The event set a fresh page load would render: confirmed entries only. */
  confirmed(): EventRecord[] {
    return this.entries
      .filter((e) => e.state === "confirmed")
      .map(({ state, warning, ...event }) => event);
  }

  async create(args: CreateArgs): Promise<EventEntry> {
    const entry: EventEntry = {
      uid: `local-${++localCounter}`,
      dtstart: args.dtstart,
      dtend: args.dtend,
      summary: args.summary,
      description: args.description,
      organizer: this.wallet.address,
      dtstamp: 0,
      state: "pending",
    };
    this.entries.push(entry); // display the event immediately
    this.emit();
    try {
      const status = await this.signed("store_event", { ...args });
      if (status.status === "included" && status.ok) {
        entry.state = "confirmed";
        if (typeof status.value === "string") {
          entry.uid = status.value; // the on-ledger uid replaces the local one
        }
        await this.sync();
        return entry;
      }
      entry.state = "rejected";
      entry.warning = status.error ?? status.status;
    } catch (err) {
      entry.state = "rejected";
      entry.warning = err instanceof GatewayError ? err.code : String(err);
    }
    this.emit();
    return entry;
  }

  async remove(uid: string): Promise<TxStatus> {
    const status = await this.signed("remove_event", { uid });
    if (status.status === "included" && status.ok) {
      await this.sync();
    }
    return status;
  }
}
