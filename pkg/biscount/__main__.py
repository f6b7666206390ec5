from biscount.cli import main

raise SystemExit(main())
