from dcffr.cli import main

raise SystemExit(main())
