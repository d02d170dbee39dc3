const FS: &[(&str, &str)] = &[
    fixture!("fs-seeds", "seed00.test"),
    fixture!("fs-seeds", "seed01.test"),
    fixture!("fs-seeds", "seed02.test"),
    fixture!("fs-seeds", "seed03.test"),
    fixture!("fs-seeds", "seed04.test"),
    fixture!("fs-seeds", "seed05.test"),
    fixture!("fs-seeds", "seed06.test"),
    fixture!("fs-seeds", "seed07.test"),
    fixture!("fs-seeds", "seed08.test"),
    fixture!("fs-seeds", "seed09.test"),
    fixture!("fs-seeds", "seed10.test"),
    fixture!("fs-seeds", "seed11.test"),
    fixture!("fs-seeds", "seed12.test"),
    fixture!("fs-seeds", "seed13.test"),
    fixture!("fs-seeds", "seed14.test"),
    fixture!("fs-seeds", "seed15.test"),
    fixture!("fs-seeds", "seed16.test"),
    fixture!("fs-seeds", "seed17.test"),
    fixture!("fs-seeds", "seed18.test"),
    fixture!("fs-seeds", "seed19.test"),
    fixture!("fs-seeds", "seed20.test"),
    fixture!("fs-seeds", "seed21.test"),
    fixture!("fs-seeds", "seed22.test"),
    fixture!("fs-seeds", "seed23.test"),
    fixture!("fs-seeds", "seed24.test"),
    fixture!("fs-seeds", "seed25.test"),
    fixture!("fs-seeds", "seed26.test"),
    fixture!("fs-seeds", "seed27.test"),
    fixture!("fs-seeds", "seed28.test"),
    fixture!("fs-seeds", "seed29.test"),
    fixture!("fs-seeds", "seed30.test"),
    fixture!("fs-seeds", "seed31.test"),
    fixture!("fs-seeds", "seed32.test"),
    fixture!("fs-seeds", "seed33.test"),
    fixture!("fs-seeds", "seed34.test"),
    fixture!("fs-seeds", "seed35.test"),
    fixture!("fs-seeds", "seed36.test"),
    fixture!("fs-seeds", "seed37.test"),
    fixture!("fs-seeds", "seed38.test"),
    fixture!("fs-seeds", "seed39.test"),
    fixture!("fs-seeds", "seed40.test"),
    fixture!("fs-seeds", "seed41.test"),
    fixture!("fs-seeds", "seed42.test"),
    fixture!("fs-seeds", "seed43.test"),
    fixture!("fs-seeds", "seed44.test"),
    fixture!("fs-seeds", "seed45.test"),
    fixture!("fs-seeds", "seed46.test"),
    fixture!("fs-seeds", "seed47.test"),
    fixture!("fs-seeds", "seed48.test"),
    fixture!("fs-seeds", "seed49.test"),
];
