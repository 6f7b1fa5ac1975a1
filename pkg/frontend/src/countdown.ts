// Countdown to the next phase boundary, anchored to server time.
// The display derives from the last /phase response plus locally elapsed
// time since it arrived; the caller re-syncs against /phase periodically
// (every 10s in main.ts) to bound drift.

import type { BoardView } from './store'

export interface Countdown {
  label: string
  msLeft: number | null
}

export function countdown(view: BoardView, msSinceSync: number): Countdown {
  const now = view.serverNow + Math.max(0, msSinceSync)
  if (view.phase === 'Preparation' && view.votingOpen !== null) {
    return { label: 'voting opens in', msLeft: Math.max(0, view.votingOpen - now) }
  }
  if (view.phase === 'Voting' && view.votingClose !== null) {
    return { label: 'voting closes in', msLeft: Math.max(0, view.votingClose - now) }
  }
  if (view.phase === 'AwaitingSettlement') {
    return { label: 'voting closed, awaiting settlement', msLeft: null }
  }
  if (view.phase === 'Settled') {
    return { label: 'settled', msLeft: null }
  }
  return { label: 'no active epoch', msLeft: null }
}

export function formatMs(ms: number): string {
  const totalSeconds = Math.ceil(ms / 1000)
  const minutes = Math.floor(totalSeconds / 60)
  const seconds = totalSeconds % 60
  return `${minutes}:${String(seconds).padStart(2, '0')}`
}
