// Board state for one student. Strictly server-authoritative: every number
// held here arrived in a service response or event payload. Events carry
// absolute values (balance after, course total after), so replaying them
// from any resume point converges on the same view.

import { ApiClient } from './api'
import { subscribe, type Subscription } from './sse'
import type { Balance, CourseRow, Phase, PhaseInfo, Results, ServerEvent } from './types'

export type ConnectionState = 'idle' | 'connecting' | 'live' | 'lost'

export interface BoardView {
  studentId: string
  phase: Phase
  epochId: string | null
  serverNow: number
  votingOpen: number | null
  votingClose: number | null
  courses: CourseRow[]
  balance: Balance
  myBids: Record<string, number> // course -> accepted tokens
  results: Results | null
  connection: ConnectionState
  message: string
  bidsEnabled: boolean
  lastSeq: number
}

function emptyBalance(studentId: string): Balance {
  return { student_id: studentId, epoch_id: null, minted: 0, spent: 0, remaining: 0 }
}

export class BoardStore {
  private phase: PhaseInfo = {
    phase: 'Unopened',
    now: 0,
    epoch_id: null,
    voting_open: null,
    voting_close: null,
  }
  private courses = new Map<string, CourseRow>()
  private balance: Balance
  private myBids: Record<string, number> = {}
  private results: Results | null = null
  private connection: ConnectionState = 'idle'
  private message = ''
  private lastSeq = -1
  private subscription: Subscription | null = null
  private listeners = new Set<() => void>()

  constructor(
    private readonly api: ApiClient,
    readonly studentId: string,
  ) {
    this.balance = emptyBalance(studentId)
  }

  onChange(listener: () => void): () => void {
    this.listeners.add(listener)
    return () => this.listeners.delete(listener)
  }

  private notify(): void {
    for (const listener of this.listeners) listener()
  }

  view(): BoardView {
    return {
      studentId: this.studentId,
      phase: this.phase.phase,
      epochId: this.phase.epoch_id,
      serverNow: this.phase.now,
      votingOpen: this.phase.voting_open,
      votingClose: this.phase.voting_close,
      courses: [...this.courses.values()],
      balance: this.balance,
      myBids: { ...this.myBids },
      results: this.results,
      connection: this.connection,
      message: this.message,
      bidsEnabled: this.phase.phase === 'Voting',
      lastSeq: this.lastSeq,
    }
  }

  /** Populate from /phase, /courses, /balance, then follow the event stream. */
  async load(): Promise<void> {
    await this.refreshPhase()
    const rows = await this.api.courses()
    this.courses = new Map(rows.map((row) => [row.course_id, row]))
    this.balance = await this.api.balance(this.studentId)
    if (this.phase.phase === 'Settled') {
      this.results = await this.api.results()
    }
    this.notify()
    this.subscription?.close()
    this.subscription = subscribe(this.api.baseUrl, this.lastSeq + 1, {
      onEvent: (event) => void this.apply(event),
      onStatus: (status) => {
        this.connection = status
        this.notify()
      },
    })
  }

  close(): void {
    this.subscription?.close()
    this.subscription = null
  }

  async refreshPhase(): Promise<void> {
    this.phase = await this.api.phase()
    this.notify()
  }

  async refreshBalance(): Promise<void> {
    this.balance = await this.api.balance(this.studentId)
    this.notify()
  }

  /** Fold one ledger event into the view. */
  async apply(event: ServerEvent): Promise<void> {
    if (event.seq <= this.lastSeq) return
    this.lastSeq = event.seq
    const payload = event.payload
    switch (event.kind) {
      case 'PhaseChanged':
        await this.refreshPhase() // windows and server-now come from /phase
        break
      case 'CourseTotalsChanged': {
        const row: CourseRow = {
          course_id: String(payload.course_id),
          title: String(payload.title),
          credits: Number(payload.credits),
          capacity: Number(payload.capacity),
          slots: String(payload.slots),
          total_tokens: Number(payload.total_tokens),
        }
        this.courses.set(row.course_id, row)
        break
      }
      case 'DeclarationRecorded':
        if (payload.student_id === this.studentId) {
          await this.refreshBalance()
        }
        break
      case 'BidRecorded': {
        const courseId = String(payload.course_id)
        const row = this.courses.get(courseId)
        if (row && payload.course_total !== null && payload.course_total !== undefined) {
          row.total_tokens = Number(payload.course_total)
        }
        if (payload.student_id === this.studentId) {
          this.balance = { ...this.balance, remaining: Number(payload.balance) }
          if (payload.accepted) {
            this.myBids[courseId] = (this.myBids[courseId] ?? 0) + Number(payload.amount)
            this.balance.spent = this.balance.minted - Number(payload.balance)
          }
        }
        break
      }
      case 'Settled':
        this.results = await this.api.results()
        await this.refreshPhase()
        break
    }
    this.notify()
  }

  /** Server-validated declare; the rendered balance is the response's. */
  async submitDeclaration(credits: number): Promise<void> {
    try {
      const response = await this.api.declare(this.studentId, credits)
      this.balance = {
        student_id: this.studentId,
        epoch_id: response.epoch_id,
        minted: response.minted_tokens,
        spent: response.minted_tokens - response.balance,
        remaining: response.balance,
      }
      this.message = `declared ${response.declared_credits} credits, ${response.minted_tokens} tokens minted`
    } catch (err) {
      this.message = `declaration rejected: ${trim(err)}`
    }
    this.notify()
  }

  /**
   * Client pre-check is advisory only (positive integer within the shown
   * balance); the server remains authoritative and its reason is rendered
   * verbatim. Balances only move on the server's response.
   */
  async submitBid(courseId: string, amount: number): Promise<void> {
    if (!Number.isInteger(amount) || amount < 1) {
      this.message = 'bid must be a positive whole number of tokens'
      this.notify()
      return
    }
    if (amount > this.balance.remaining) {
      this.message = `bid exceeds your remaining ${this.balance.remaining} tokens`
      this.notify()
      return
    }
    if (this.phase.phase !== 'Voting') {
      this.message = 'bidding is closed'
      this.notify()
      return
    }
    try {
      const outcome = await this.api.bid(this.studentId, courseId, amount)
      if (outcome.accepted) {
        this.balance = { ...this.balance, remaining: outcome.balance }
        this.balance.spent = this.balance.minted - outcome.balance
        this.myBids[courseId] = (this.myBids[courseId] ?? 0) + amount
        this.message = `bid accepted: ${amount} on ${courseId}`
      } else {
        this.message = `bid rejected: ${outcome.reason}`
        if (outcome.reason === 'InsufficientTokens') {
          await this.refreshBalance() // a rival tab may have spent first
        }
      }
    } catch (err) {
      this.message = `bid not sent: ${trim(err)}` // transport failure, state unchanged
    }
    this.notify()
  }
}

function trim(err: unknown): string {
  const text = err instanceof Error ? err.message : String(err)
  return text.length > 120 ? text.slice(0, 120) + '…' : text
}
