import { describe, expect, it } from 'vitest'

import { countdown, formatMs } from '../src/countdown'
import { parseSseChunk } from '../src/sse'
import type { BoardView } from '../src/store'

function view(overrides: Partial<BoardView>): BoardView {
  return {
    studentId: 'A',
    phase: 'Preparation',
    epochId: 'E',
    serverNow: 0,
    votingOpen: 1000,
    votingClose: 2000,
    courses: [],
    balance: { student_id: 'A', epoch_id: 'E', minted: 0, spent: 0, remaining: 0 },
    myBids: {},
    results: null,
    connection: 'live',
    message: '',
    bidsEnabled: false,
    lastSeq: -1,
    ...overrides,
  }
}

describe('sse parser', () => {
  it('splits frames and keeps the partial tail', () => {
    const frame = 'id: 0\nevent: BidRecorded\ndata: {"kind":"BidRecorded","seq":0,"payload":{}}\n\n'
    const { events, rest } = parseSseChunk(frame + 'id: 1\ndata: {"k')
    expect(events.map((e) => e.seq)).toEqual([0])
    expect(rest).toContain('{"k')
  })

  it('ignores keepalive comments', () => {
    const { events, rest } = parseSseChunk(': keepalive\n\n')
    expect(events).toEqual([])
    expect(rest).toBe('')
  })

  it('parses consecutive events', () => {
    const chunk =
      'data: {"kind":"PhaseChanged","seq":3,"payload":{}}\n\n' +
      'data: {"kind":"Settled","seq":4,"payload":{}}\n\n'
    const { events } = parseSseChunk(chunk)
    expect(events.map((e) => [e.seq, e.kind])).toEqual([
      [3, 'PhaseChanged'],
      [4, 'Settled'],
    ])
  })
})

describe('countdown', () => {
  it('counts down to voting open during preparation', () => {
    const tick = countdown(view({ phase: 'Preparation', serverNow: 400 }), 100)
    expect(tick.label).toBe('voting opens in')
    expect(tick.msLeft).toBe(500)
  })

  it('counts down to voting close during voting', () => {
    const tick = countdown(view({ phase: 'Voting', serverNow: 1500 }), 0)
    expect(tick.msLeft).toBe(500)
  })

  it('never goes negative', () => {
    const tick = countdown(view({ phase: 'Voting', serverNow: 1999 }), 5000)
    expect(tick.msLeft).toBe(0)
  })

  it('reports terminal states without a timer', () => {
    expect(countdown(view({ phase: 'Settled' }), 0).msLeft).toBeNull()
    expect(countdown(view({ phase: 'AwaitingSettlement' }), 0).msLeft).toBeNull()
    expect(countdown(view({ phase: 'Unopened' }), 0).label).toBe('no active epoch')
  })

  it('formats minutes and seconds', () => {
    expect(formatMs(61_000)).toBe('1:01')
    expect(formatMs(500)).toBe('0:01')
  })
})
