import { defineConfig } from 'vitest/config'

// Dev server proxies API calls to the python service; the production build
// is static assets that any file host (or the service box itself) can serve.
export default defineConfig({
  server: {
    proxy: {
      '/admin': 'http://127.0.0.1:8000',
      '/declare': 'http://127.0.0.1:8000',
      '/bids': 'http://127.0.0.1:8000',
      '/phase': 'http://127.0.0.1:8000',
      '/courses': 'http://127.0.0.1:8000',
      '/balance': 'http://127.0.0.1:8000',
      '/results': 'http://127.0.0.1:8000',
      '/ledger': 'http://127.0.0.1:8000',
      '/events': 'http://127.0.0.1:8000',
    },
  },
  test: {
    environment: 'node',
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
})
