// UTC civil-date math (days-from-civil closed form) and month-grid cells.
// All times are unix seconds; the UI never consults the browser time zone.

export interface Civil {
  year: number;
  month: number; // 1..12
  day: number;
  hour: number;
  minute: number;
  second: number;
}

export const DAY = 86400;

export function daysFromCivil(year: number, month: number, day: number): number {
  const y = year - (month <= 2 ? 1 : 0);
  const era = Math.floor((y >= 0 ? y : y - 399) / 400);
  const yoe = y - era * 400;
  const doy = Math.floor((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5) + day - 1;
  const doe = yoe * 365 + Math.floor(yoe / 4) - Math.floor(yoe / 100) + doy;
  return era * 146097 + doe - 719468;
}

export function civilFromDays(days: number): [number, number, number] {
  const z = days + 719468;
  const era = Math.floor((z >= 0 ? z : z - 146096) / 146097);
  const doe = z - era * 146097;
  const yoe = Math.floor((doe - Math.floor(doe / 1460) + Math.floor(doe / 36524) - Math.floor(doe / 146096)) / 365);
  const y = yoe + era * 400;
  const doy = doe - (365 * yoe + Math.floor(yoe / 4) - Math.floor(yoe / 100));
  const mp = Math.floor((5 * doy + 2) / 153);
  const day = doy - Math.floor((153 * mp + 2) / 5) + 1;
  const month = mp + (mp < 10 ? 3 : -9);
  return [y + (month <= 2 ? 1 : 0), month, day];
}

export function unixToCivil(t: number): Civil {
  const days = Math.floor(t / DAY);
  const rem = t - days * DAY;
  const [year, month, day] = civilFromDays(days);
  return {
    year,
    month,
    day,
    hour: Math.floor(rem / 3600),
    minute: Math.floor((rem % 3600) / 60),
    second: rem % 60,
  };
}

export function civilToUnix(c: Civil): number {
  return daysFromCivil(c.year, c.month, c.day) * DAY + c.hour * 3600 + c.minute * 60 + c.second;
}

const pad = (n: number, w = 2) => String(n).padStart(w, "0");

export function formatStamp(t: number): string {
  const c = unixToCivil(t);
  return `${pad(c.year, 4)}-${pad(c.month)}-${pad(c.day)} ${pad(c.hour)}:${pad(c.minute)} UTC`;
}

export function formatTime(t: number): string {
  const c = unixToCivil(t);
  return `${pad(c.hour)}:${pad(c.minute)}`;
}

/** Parse the value of an <input type="datetime-local"> as a UTC instant. */
export function parseLocalInput(value: string): number {
  const m = /^(\d{4})-(\d{2})-(\d{2})T(\d{2}):(\d{2})(?::(\d{2}))?$/.exec(value);
  if (!m) {
    throw new Error(`not a date-time: ${value}`);
  }
  return civilToUnix({
    year: +m[1],
    month: +m[2],
    day: +m[3],
    hour: +m[4],
    minute: +m[5],
    second: m[6] ? +m[6] : 0,
  });
}

export interface DayCell {
  year: number;
  month: number;
  day: number;
  inMonth: boolean;
  startUnix: number; // midnight UTC, inclusive
  endUnix: number;   // next midnight, exclusive
}

export const MONTH_NAMES = [
  "January", "February", "March", "April", "May", "June",
  "July", "August", "September", "October", "November", "December",
];

/** Six Monday-first weeks covering the given month. */
export function monthGrid(year: number, month: number): DayCell[][] {
  const first = daysFromCivil(year, month, 1);
  const weekday = (((first + 3) % 7) + 7) % 7; // 0 = Monday (day 0 was a Thursday)
  let cursor = first - weekday;
  const weeks: DayCell[][] = [];
  for (let w = 0; w < 6; w++) {
    const week: DayCell[] = [];
    for (let d = 0; d < 7; d++, cursor++) {
      const [cy, cm, cd] = civilFromDays(cursor);
      week.push({
        year: cy,
        month: cm,
        day: cd,
        inMonth: cy === year && cm === month,
        startUnix: cursor * DAY,
        endUnix: (cursor + 1) * DAY,
      });
    }
    weeks.push(week);
  }
  return weeks;
}

export function addMonths(year: number, month: number, delta: number): [number, number] {
  const index = year * 12 + (month - 1) + delta;
  return [Math.floor(index / 12), (((index % 12) + 12) % 12) + 1];
}
