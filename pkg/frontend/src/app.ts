// Single-page client: month calendar, admin dashboard, feed links.
// All state lives in the ledger behind the gateway; the only local secrets
// are the dev wallet seed and the optimistic entries awaiting inclusion.

import { addMonths, DayCell, formatStamp, formatTime, MONTH_NAMES, monthGrid, parseLocalInput, unixToCivil } from "./dates.js";
import { Gateway, GatewayError, GrantRow } from "./gateway.js";
import { EventEntry, EventStore } from "./store.js";
import { signTx } from "./tx.js";
import { loadOrCreateWallet, Wallet } from "./wallet.js";

type Attrs = Record<string, string | ((ev: Event) => void)>;

function h(tag: string, attrs: Attrs = {}, ...children: (Node | string)[]): HTMLElement {
  const el = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      el.addEventListener(key, value);
    } else if (key === "class") {
      el.className = value;
    } else {
      el.setAttribute(key, value);
    }
  }
  el.append(...children);
  return el;
}

function toast(message: string, kind: "error" | "info" = "error") {
  const box = document.getElementById("toasts")!;
  const el = h("div", { class: `toast ${kind}` }, message);
  box.append(el);
  setTimeout(() => el.remove(), 6000);
}

const gateway = new Gateway("");
const wallet: Wallet = loadOrCreateWallet(localStorage);

let store: EventStore | null = null;
let viewYear = 2026;
let viewMonth = 1;

function selectedContract(): string | null {
  return localStorage.getItem("ledgercal.contract");
}

async function init() {
  const now = await gateway.head().then((head) => head.time).catch(() => 0);
  const civil = unixToCivil(now || Math.floor(Date.now() / 1000));
  viewYear = civil.year;
  viewMonth = civil.month;
  renderHeader();
  await renderContractPicker();
  const contract = selectedContract();
  if (contract) {
    store = new EventStore(gateway, wallet, contract);
    store.onChange = renderCalendar;
    try {
      await store.reload(); // a page refresh shows exactly the gateway's view
    } catch (err) {
      store.entries = [];
      toast(err instanceof GatewayError ? `${err.code}: ${err.message}` : String(err));
    }
  }
  renderCalendar();
  await renderAccessPanels();
}

function renderHeader() {
  const header = document.getElementById("wallet")!;
  header.replaceChildren(
    h("span", { class: "addr", title: "your address (kept with its seed in this browser)" },
      wallet.address),
    h("button", {
      click: () => navigator.clipboard.writeText(wallet.address).then(
        () => toast("address copied", "info")),
    }, "copy"),
    h("span", { id: "balance", class: "muted" }, ""),
  );
  gateway.account(wallet.address).then((info) => {
    document.getElementById("balance")!.textContent =
      `balance ${info.balance} · nonce ${info.nonce}`;
  }).catch(() => undefined);
}

async function renderContractPicker() {
  const picker = document.getElementById("contract-picker")!;
  let rows: { address: string; kind: string; owner: string }[] = [];
  try {
    rows = (await gateway.contracts()).filter((c) => c.kind !== "msg-store");
  } catch {
    picker.replaceChildren(h("span", { class: "warn" }, "gateway unreachable"));
    return;
  }
  const select = h("select", {
    change: (ev) => {
      localStorage.setItem("ledgercal.contract", (ev.target as HTMLSelectElement).value);
      location.reload();
    },
  }) as HTMLSelectElement;
  select.append(h("option", { value: "" }, "choose a calendar contract"));
  for (const row of rows) {
    const option = h("option", { value: row.address }, `${row.kind} ${row.address}`) as HTMLOptionElement;
    option.selected = row.address === selectedContract();
    select.append(option);
  }
  picker.replaceChildren(select);
}

function entriesInCell(cell: DayCell): EventEntry[] {
  if (!store) return [];
  return store.entries.filter((e) => e.dtstart >= cell.startUnix && e.dtstart < cell.endUnix);
}

function renderCalendar() {
  const root = document.getElementById("calendar")!;
  if (!store) {
    root.replaceChildren(h("p", { class: "muted" },
      "Pick a contract above (deploy one with the CLI) to see its calendar."));
    return;
  }
  const title = h("div", { class: "cal-nav" },
    h("button", { click: () => moveMonth(-1) }, "←"),
    h("span", { class: "cal-title" }, `${MONTH_NAMES[viewMonth - 1]} ${viewYear}`),
    h("button", { click: () => moveMonth(1) }, "→"),
    h("button", { click: () => { store!.reload().then(renderCalendar).catch((e) => toast(String(e))); } }, "refresh"),
  );
  const table = h("table", { class: "cal" });
  table.append(h("tr", {}, ...["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"].map(
    (d) => h("th", {}, d))));
  for (const week of monthGrid(viewYear, viewMonth)) {
    const row = h("tr", {});
    for (const cell of week) {
      const td = h("td", { class: cell.inMonth ? "in" : "out" },
        h("div", { class: "daynum", dblclick: () => openCreateForm(cell) }, String(cell.day)));
      for (const entry of entriesInCell(cell)) {
        td.append(renderEntry(entry));
      }
      td.append(h("button", { class: "add", click: () => openCreateForm(cell) }, "+"));
      row.append(td);
    }
    table.append(row);
  }
  root.replaceChildren(title, table);
}

function renderEntry(entry: EventEntry): HTMLElement {
  const classes = ["event", entry.state];
  const el = h("div", { class: classes.join(" "), title: entry.description || entry.summary },
    h("span", {}, `${formatTime(entry.dtstart)} ${entry.summary}`));
  if (entry.state === "rejected") {
    el.append(h("span", { class: "badge", title: "stored on this client only" },
      `local only: ${entry.warning ?? "rejected"} (clears on refresh)`));
  } else if (entry.state === "pending") {
    el.append(h("span", { class: "badge" }, "awaiting inclusion"));
  } else {
    el.append(h("button", {
      class: "del",
      click: async () => {
        try {
          const status = await store!.remove(entry.uid);
          if (!(status.status === "included" && status.ok)) {
            toast(`delete failed: ${status.error ?? status.status}`);
          }
        } catch (err) {
          toast(err instanceof GatewayError ? `${err.code}: ${err.message}` : String(err));
        }
      },
    }, "×"));
  }
  return el;
}

function moveMonth(delta: number) {
  [viewYear, viewMonth] = addMonths(viewYear, viewMonth, delta);
  renderCalendar();
}

function openCreateForm(cell: DayCell) {
  const dialog = document.getElementById("create-dialog") as HTMLDialogElement;
  const pad = (n: number) => String(n).padStart(2, "0");
  const base = `${pad(cell.year)}-${pad(cell.month)}-${pad(cell.day)}`;
  (document.getElementById("create-start") as HTMLInputElement).value = `${base}T09:00`;
  (document.getElementById("create-end") as HTMLInputElement).value = `${base}T10:00`;
  (document.getElementById("create-summary") as HTMLInputElement).value = "";
  (document.getElementById("create-description") as HTMLInputElement).value = "";
  dialog.showModal();
}

function wireCreateForm() {
  const dialog = document.getElementById("create-dialog") as HTMLDialogElement;
  document.getElementById("create-form")!.addEventListener("submit", (ev) => {
    ev.preventDefault();
    if (!store) return;
    let dtstart: number, dtend: number;
    try {
      dtstart = parseLocalInput((document.getElementById("create-start") as HTMLInputElement).value);
      dtend = parseLocalInput((document.getElementById("create-end") as HTMLInputElement).value);
    } catch (err) {
      toast(String(err));
      return;
    }
    if (dtend < dtstart) {
      toast("end is before start");
      return;
    }
    const summary = (document.getElementById("create-summary") as HTMLInputElement).value;
    const description = (document.getElementById("create-description") as HTMLInputElement).value;
    dialog.close();
    // optimistic: the entry renders immediately; a rejection turns it into
    // a warned local-only entry that the next refresh clears
    store.create({ dtstart, dtend, summary, description }).then((entry) => {
      if (entry.state === "rejected") {
        toast(`event rejected by the ledger: ${entry.warning}`);
      }
    });
  });
  document.getElementById("create-cancel")!.addEventListener("click", () => dialog.close());
}

async function renderAccessPanels() {
  const contract = selectedContract();
  const admin = document.getElementById("admin")!;
  const feed = document.getElementById("feed")!;
  if (!contract) {
    admin.replaceChildren();
    feed.replaceChildren();
    return;
  }

  feed.replaceChildren(
    h("h2", {}, "Calendar feed"),
    h("code", {}, new URL(gateway.feedUrl(contract, wallet.address), location.href).href),
    h("button", {
      click: () => navigator.clipboard
        .writeText(new URL(gateway.feedUrl(contract, wallet.address), location.href).href)
        .then(() => toast("feed URL copied", "info")),
    }, "copy"),
    h("p", { class: "warn" },
      "Anyone who knows this address can read this feed. The URL is the key; share it only with readers you trust."),
  );

  let level = "none";
  try {
    level = (await gateway.access(contract, wallet.address)).level;
  } catch (err) {
    if (err instanceof GatewayError && err.code === "unknown_operation") {
      level = "direct"; // plain cal-store: no grants, full personal access
    }
  }
  if (level === "admin") {
    await renderAdminDashboard(contract, admin);
  } else if (level === "direct") {
    admin.replaceChildren();
  } else {
    admin.replaceChildren(
      h("h2", {}, "Administration"),
      h("p", { class: "muted" },
        `You are not this calendar's administrator (your access: ${level}). The dashboard is read-only for you.`),
    );
  }
}

async function renderAdminDashboard(contract: string, root: HTMLElement) {
  let grants: GrantRow[] = [];
  try {
    grants = await gateway.grants(contract, wallet.address);
  } catch (err) {
    root.replaceChildren(h("p", { class: "warn" }, String(err)));
    return;
  }
  const table = h("table", { class: "grants" },
    h("tr", {}, h("th", {}, "account"), h("th", {}, "level"),
      h("th", {}, "from"), h("th", {}, "to"), h("th", {}, "")));
  for (const row of grants) {
    table.append(h("tr", {},
      h("td", { class: "addr" }, row.account),
      h("td", {}, row.level),
      h("td", {}, row.not_before === null ? "open" : formatStamp(row.not_before)),
      h("td", {}, row.not_after === null ? "open" : formatStamp(row.not_after)),
      h("td", {}, h("button", {
        click: () => adminTx("revoke_access", { account: row.account }),
      }, "revoke")),
    ));
  }

  const account = h("input", { placeholder: "0x… account", size: "46" }) as HTMLInputElement;
  const level = h("select", {},
    h("option", { value: "read" }, "read-only"),
    h("option", { value: "write" }, "read-write")) as HTMLSelectElement;
  const from = h("input", { type: "datetime-local" }) as HTMLInputElement;
  const to = h("input", { type: "datetime-local" }) as HTMLInputElement;
  const grantForm = h("div", { class: "row" },
    account, level, h("label", {}, "from ", from), h("label", {}, "to ", to),
    h("button", {
      click: () => {
        let notBefore: number | null = null;
        let notAfter: number | null = null;
        try {
          notBefore = from.value ? parseLocalInput(from.value) : null;
          notAfter = to.value ? parseLocalInput(to.value) : null;
        } catch (err) {
          toast(String(err));
          return;
        }
        if (notBefore !== null && notAfter !== null && notAfter < notBefore) {
          toast("window end is before its start"); // blocked client-side
          return;
        }
        adminTx("grant_access", {
          account: account.value.trim(), level: level.value,
          not_before: notBefore, not_after: notAfter,
        });
      },
    }, "grant"),
  );

  const newOwner = h("input", { placeholder: "0x… new owner", size: "46" }) as HTMLInputElement;
  const transferForm = h("div", { class: "row" },
    newOwner,
    h("button", {
      click: () => adminTx("transfer_cal_auth", { new_owner: newOwner.value.trim() }),
    }, "transfer ownership"),
  );

  root.replaceChildren(
    h("h2", {}, "Administration"),
    table,
    h("h3", {}, "Grant access"),
    grantForm,
    h("h3", {}, "Transfer ownership"),
    h("p", { class: "muted" },
      "Hands the admin role and ownership to the new owner; this dashboard locks for you afterwards."),
    transferForm,
  );
}

async function adminTx(op: string, args: Record<string, string | number | null>) {
  const contract = selectedContract();
  if (!contract) return;
  try {
    const info = await gateway.account(wallet.address);
    const status = await gateway.submitAndWait(
      signTx(wallet, { nonce: info.next_nonce, target: contract, op, args }));
    if (status.status === "included" && status.ok) {
      toast(`${op} done`, "info");
    } else {
      toast(`${op} failed: ${status.error ?? status.status}`);
    }
  } catch (err) {
    toast(err instanceof GatewayError ? `${err.code}: ${err.message}` : String(err));
  }
  await renderAccessPanels();
  if (store) {
    await store.sync().catch(() => undefined);
  }
}

wireCreateForm();
init().catch((err) => toast(String(err)));
