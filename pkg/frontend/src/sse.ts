// Server-sent-events over a streaming fetch, with resume and reconnect.
// A fetch reader works both in browsers and under Node test runners, so no
// EventSource polyfill is needed; the resume cursor rides the query string.

import type { ServerEvent } from './types'

export interface Subscription {
  close(): void
}

interface Handlers {
  onEvent(event: ServerEvent): void
  onStatus?(status: 'connecting' | 'live' | 'lost'): void
}

export function parseSseChunk(buffer: string): { events: ServerEvent[]; rest: string } {
  const events: ServerEvent[] = []
  const frames = buffer.split('\n\n')
  const rest = frames.pop() ?? ''
  for (const frame of frames) {
    let data = ''
    for (const line of frame.split('\n')) {
      if (line.startsWith('data: ')) data += line.slice(6)
    }
    if (!data) continue // comment/keepalive frame
    try {
      events.push(JSON.parse(data) as ServerEvent)
    } catch {
      // a malformed frame is dropped, the seq cursor keeps the stream gapless
    }
  }
  return { events, rest }
}

export function subscribe(baseUrl: string, resume: number, handlers: Handlers): Subscription {
  const controller = new AbortController()
  let cursor = resume
  let active = true

  async function pump(): Promise<void> {
    while (active) {
      handlers.onStatus?.('connecting')
      try {
        const response = await fetch(`${baseUrl}/events?resume=${cursor}`, {
          signal: controller.signal,
          headers: { Accept: 'text/event-stream' },
        })
        if (!response.ok || !response.body) throw new Error(`events: HTTP ${response.status}`)
        handlers.onStatus?.('live')
        const reader = response.body.getReader()
        const decoder = new TextDecoder()
        let buffer = ''
        for (;;) {
          const { done, value } = await reader.read()
          if (done) break
          buffer += decoder.decode(value, { stream: true })
          const { events, rest } = parseSseChunk(buffer)
          buffer = rest
          for (const event of events) {
            cursor = event.seq + 1
            handlers.onEvent(event)
          }
        }
      } catch {
        if (!active) return
      }
      if (!active) return
      handlers.onStatus?.('lost')
      await new Promise((resolve) => setTimeout(resolve, 1000))
    }
  }

  void pump()
  return {
    close() {
      active = false
      controller.abort()
    },
  }
}
