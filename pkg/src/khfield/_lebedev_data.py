"""Generator tables for the embedded Lebedev sphere rules.

Each rule is stored as a tuple of octahedral orbit generators
(class code, a, b, weight).  The class code selects one of the six
point orbits of the octahedral group:

    0: (1,0,0) and permutations/sign flips            6 points
    1: (0,a,a), a=1/sqrt(2)                          12 points
    2: (a,a,a), a=1/sqrt(3)                           8 points
    3: (a,a,b), b=sqrt(1-2a^2)                       24 points
    4: (a,b,0), b=sqrt(1-a^2)                        24 points
    5: (a,b,c), c=sqrt(1-a^2-b^2)                    48 points

Parameters are the published 16-digit Lebedev-Laikov values.  Weights
sum to 1 over the sphere; the quadrature module rescales to 4*pi.
Rules whose standard tables contain negative weights (74, 230, 266
points) are deliberately not included.
"""

# degree of polynomial exactness per node count
_ORDER = {
    6: 3,
    14: 5,
    26: 7,
    38: 9,
    50: 11,
    86: 15,
    110: 17,
    146: 19,
    170: 21,
    194: 23,
    302: 29,
    350: 31,
    434: 35,
    590: 41,
    770: 47,
    974: 53,
    1202: 59,
    1454: 65,
}

_GENERATORS = {
    6: (
        (0, 0, 0, 0.1666666666666667e+0),
    ),
    14: (
        (0, 0, 0, 0.6666666666666667e-1),
        (2, 0, 0, 0.7500000000000000e-1),
    ),
    26: (
        (0, 0, 0, 0.4761904761904762e-1),
        (1, 0, 0, 0.3809523809523810e-1),
        (2, 0, 0, 0.3214285714285714e-1),
    ),
    38: (
        (0, 0, 0, 0.9523809523809524e-2),
        (2, 0, 0, 0.3214285714285714e-1),
        (4, 0.4597008433809831e+0, 0, 0.2857142857142857e-1),
    ),
    50: (
        (0, 0, 0, 0.1269841269841270e-1),
        (1, 0, 0, 0.2257495590828924e-1),
        (2, 0, 0, 0.2109375000000000e-1),
        (3, 0.3015113445777636e+0, 0, 0.2017333553791887e-1),
    ),
    86: (
        (0, 0, 0, 0.1154401154401154e-1),
        (2, 0, 0, 0.1194390908585628e-1),
        (3, 0.3696028464541502e+0, 0, 0.1111055571060340e-1),
        (3, 0.6943540066026664e+0, 0, 0.1187650129453714e-1),
        (4, 0.3742430390903412e+0, 0, 0.1181230374690448e-1),
    ),
    110: (
        (0, 0, 0, 0.3828270494937162e-2),
        (2, 0, 0, 0.9793737512487512e-2),
        (3, 0.1851156353447362e+0, 0, 0.8211737283191111e-2),
        (3, 0.6904210483822922e+0, 0, 0.9942814891178103e-2),
        (3, 0.3956894730559419e+0, 0, 0.9595471336070963e-2),
        (4, 0.4783690288121502e+0, 0, 0.9694996361663028e-2),
    ),
    146: (
        (0, 0, 0, 0.5996313688621381e-3),
        (1, 0, 0, 0.7372999718620756e-2),
        (2, 0, 0, 0.7210515360144488e-2),
        (3, 0.6764410400114264e+0, 0, 0.7116355493117555e-2),
        (3, 0.4174961227965453e+0, 0, 0.6753829486314477e-2),
        (3, 0.1574676672039082e+0, 0, 0.7574394159054034e-2),
        (5, 0.1403553811713183e+0, 0.4493328323269557e+0, 0.6991087353303262e-2),
    ),
    170: (
        (0, 0, 0, 0.5544842902037365e-2),
        (1, 0, 0, 0.6071332770670752e-2),
        (2, 0, 0, 0.6383674773515093e-2),
        (3, 0.2551252621114134e+0, 0, 0.5183387587747790e-2),
        (3, 0.6743601460362766e+0, 0, 0.6317929009813725e-2),
        (3, 0.4318910696719410e+0, 0, 0.6201670006589077e-2),
        (4, 0.2613931360335988e+0, 0, 0.5477143385137348e-2),
        (5, 0.4990453161796037e+0, 0.1446630744325115e+0, 0.5968383987681156e-2),
    ),
    194: (
        (0, 0, 0, 0.1782340447244611e-2),
        (1, 0, 0, 0.5716905949977102e-2),
        (2, 0, 0, 0.5573383178848738e-2),
        (3, 0.6712973442695226e+0, 0, 0.5608704082587997e-2),
        (3, 0.2892465627575439e+0, 0, 0.5158237711805383e-2),
        (3, 0.4446933178717437e+0, 0, 0.5518771467273614e-2),
        (3, 0.1299335447650067e+0, 0, 0.4106777028169394e-2),
        (4, 0.3457702197611283e+0, 0, 0.5051846064614808e-2),
        (5, 0.1590417105383530e+0, 0.8360360154824589e+0, 0.5530248916233094e-2),
    ),
    302: (
        (0, 0, 0, 0.8545911725128148e-3),
        (2, 0, 0, 0.3599119285025571e-2),
        (3, 0.3515640345570105e+0, 0, 0.3449788424305883e-2),
        (3, 0.6566329410219612e+0, 0, 0.3604822601419882e-2),
        (3, 0.4729054132581005e+0, 0, 0.3576729661743367e-2),
        (3, 0.9618308522614784e-1, 0, 0.2352101413689164e-2),
        (3, 0.2219645236294178e+0, 0, 0.3108953122413675e-2),
        (3, 0.7011766416089545e+0, 0, 0.3650045807677255e-2),
        (4, 0.2644152887060663e+0, 0, 0.2982344963171804e-2),
        (4, 0.5718955891878961e+0, 0, 0.3600820932216460e-2),
        (5, 0.2510034751770465e+0, 0.8000727494073952e+0, 0.3571540554273387e-2),
        (5, 0.1233548532583327e+0, 0.4127724083168531e+0, 0.3392312205006170e-2),
    ),
    350: (
        (0, 0, 0, 0.3006796749453936e-2),
        (2, 0, 0, 0.3050627745650771e-2),
        (3, 0.7068965463912316e+0, 0, 0.1621104600288991e-2),
        (3, 0.4794682625712025e+0, 0, 0.3005701484901752e-2),
        (3, 0.1927533154878019e+0, 0, 0.2990992529653774e-2),
        (3, 0.6930357961327123e+0, 0, 0.2982170644107595e-2),
        (3, 0.3608302115520091e+0, 0, 0.2721564237310992e-2),
        (3, 0.6498486161496169e+0, 0, 0.3033513795811141e-2),
        (4, 0.1932945013230339e+0, 0, 0.3007949555218533e-2),
        (4, 0.3800494919899303e+0, 0, 0.2881964603055307e-2),
        (5, 0.2899558825499574e+0, 0.7934537856582316e+0, 0.2958357626535696e-2),
        (5, 0.9684121455103957e-1, 0.8280801506686862e+0, 0.3036020026407088e-2),
        (5, 0.1833434647041659e+0, 0.9074658265305127e+0, 0.2832187403926303e-2),
    ),
    434: (
        (0, 0, 0, 0.5265897968224436e-3),
        (1, 0, 0, 0.2548219972002607e-2),
        (2, 0, 0, 0.2512317418927307e-2),
        (3, 0.6909346307509111e+0, 0, 0.2530403801186355e-2),
        (3, 0.1774836054609158e+0, 0, 0.2014279020918528e-2),
        (3, 0.4914342637784746e+0, 0, 0.2501725168402936e-2),
        (3, 0.6456664707424256e+0, 0, 0.2513267174597564e-2),
        (3, 0.2861289010307638e+0, 0, 0.2302694782227416e-2),
        (3, 0.7568084367178018e-1, 0, 0.1462495621594614e-2),
        (3, 0.3927259763368002e+0, 0, 0.2445373437312980e-2),
        (4, 0.8818132877794288e+0, 0, 0.2417442375638981e-2),
        (4, 0.9776428111182649e+0, 0, 0.1910951282179532e-2),
        (5, 0.2054823696403044e+0, 0.8689460322872412e+0, 0.2416930044324775e-2),
        (5, 0.5905157048925271e+0, 0.7999278543857286e+0, 0.2512236854563495e-2),
        (5, 0.5550152361076807e+0, 0.7717462626915901e+0, 0.2496644054553086e-2),
        (5, 0.9371809858553722e+0, 0.3344363145343455e+0, 0.2236607760437849e-2),
    ),
    590: (
        (0, 0, 0, 0.3095121295306187e-3),
        (2, 0, 0, 0.1852379698597489e-2),
        (3, 0.7040954938227469e+0, 0, 0.1871790639277744e-2),
        (3, 0.6807744066455243e+0, 0, 0.1858812585438317e-2),
        (3, 0.6372546939258752e+0, 0, 0.1852028828296213e-2),
        (3, 0.5044419707800358e+0, 0, 0.1846715956151242e-2),
        (3, 0.4215761784010967e+0, 0, 0.1818471778162769e-2),
        (3, 0.3317920736472123e+0, 0, 0.1749564657281154e-2),
        (3, 0.2384736701421887e+0, 0, 0.1617210647254411e-2),
        (3, 0.1459036449157763e+0, 0, 0.1384737234851692e-2),
        (3, 0.6095034115507196e-1, 0, 0.9764331165051050e-3),
        (4, 0.6116843442009876e+0, 0, 0.1857161196774078e-2),
        (4, 0.3964755348199858e+0, 0, 0.1705153996395864e-2),
        (4, 0.1724782009907724e+0, 0, 0.1300321685886048e-2),
        (5, 0.5610263808622060e+0, 0.3518280927733519e+0, 0.1842866472905286e-2),
        (5, 0.4742392842551980e+0, 0.2634716655937950e+0, 0.1802658934377451e-2),
        (5, 0.5984126497885380e+0, 0.1816640840360209e+0, 0.1849830560443660e-2),
        (5, 0.3791035407695563e+0, 0.1720795225656878e+0, 0.1713904507106709e-2),
        (5, 0.2778673190586244e+0, 0.8213021581932511e-1, 0.1555213603396808e-2),
        (5, 0.5033564271075117e+0, 0.8999205842074875e-1, 0.1802239128008525e-2),
    ),
    770: (
        (0, 0, 0, 0.2192942088181184e-3),
        (1, 0, 0, 0.1436433617319080e-2),
        (2, 0, 0, 0.1421940344335877e-2),
        (3, 0.5087204410502360e-1, 0, 0.6798123511050502e-3),
        (3, 0.1228198790178831e+0, 0, 0.9913184235294912e-3),
        (3, 0.2026890814408786e+0, 0, 0.1180207833238949e-2),
        (3, 0.2847745156464294e+0, 0, 0.1296599602080921e-2),
        (3, 0.3656719078978026e+0, 0, 0.1365871427428316e-2),
        (3, 0.4428264886713469e+0, 0, 0.1402988604775325e-2),
        (3, 0.5140619627249735e+0, 0, 0.1418645563595609e-2),
        (3, 0.6306401219166803e+0, 0, 0.1421376741851662e-2),
        (3, 0.6716883332022612e+0, 0, 0.1423996475490962e-2),
        (3, 0.6979792685336881e+0, 0, 0.1431554042178567e-2),
        (4, 0.1446865674195309e+0, 0, 0.9254401499865368e-3),
        (4, 0.3390263475411216e+0, 0, 0.1250239995053509e-2),
        (4, 0.5335804651263506e+0, 0, 0.1394365843329230e-2),
        (5, 0.6944024393349413e-1, 0.2355187894242326e+0, 0.1127089094671749e-2),
        (5, 0.2269004109529460e+0, 0.4102182474045730e+0, 0.1345753760910670e-2),
        (5, 0.8025574607775339e-1, 0.6214302417481605e+0, 0.1424957283316783e-2),
        (5, 0.1467999527896572e+0, 0.3245284345717394e+0, 0.1261523341237750e-2),
        (5, 0.1571507769824727e+0, 0.5224482189696630e+0, 0.1392547106052696e-2),
        (5, 0.2365702993157246e+0, 0.6017546634089558e+0, 0.1418761677877656e-2),
        (5, 0.7714815866765732e-1, 0.4346575516141163e+0, 0.1338366684479554e-2),
        (5, 0.3062936666210730e+0, 0.4908826589037616e+0, 0.1393700862676131e-2),
        (5, 0.3822477379524787e+0, 0.5648768149099500e+0, 0.1415914757466932e-2),
    ),
    974: (
        (0, 0, 0, 0.1438294190527431e-3),
        (2, 0, 0, 0.1125772288287004e-2),
        (3, 0.4292963545341347e-1, 0, 0.4948029341949241e-3),
        (3, 0.1051426854086404e+0, 0, 0.7357990109125470e-3),
        (3, 0.1750024867623087e+0, 0, 0.8889132771304384e-3),
        (3, 0.2477653379650257e+0, 0, 0.9888347838921435e-3),
        (3, 0.3206567123955957e+0, 0, 0.1053299681709471e-2),
        (3, 0.3916520749849983e+0, 0, 0.1092778807014578e-2),
        (3, 0.4590825874187624e+0, 0, 0.1114389394063227e-2),
        (3, 0.5214563888415861e+0, 0, 0.1123724788051555e-2),
        (3, 0.6253170244654199e+0, 0, 0.1125239325243814e-2),
        (3, 0.6637926744523170e+0, 0, 0.1126153271815905e-2),
        (3, 0.6910410398498301e+0, 0, 0.1130286931123841e-2),
        (3, 0.7052907007457760e+0, 0, 0.1134986534363955e-2),
        (4, 0.1236686762657990e+0, 0, 0.6823367927109931e-3),
        (4, 0.2940777114468387e+0, 0, 0.9454158160447096e-3),
        (4, 0.4697753849207649e+0, 0, 0.1074429975385679e-2),
        (4, 0.6334563241139567e+0, 0, 0.1129300086569132e-2),
        (5, 0.5974048614181342e-1, 0.2029128752777523e+0, 0.8436884500901954e-3),
        (5, 0.1375760408473636e+0, 0.4602621942484054e+0, 0.1075255720448885e-2),
        (5, 0.3391016526336286e+0, 0.5030673999662036e+0, 0.1108577236864462e-2),
        (5, 0.1271675191439820e+0, 0.2817606422442134e+0, 0.9566475323783357e-3),
        (5, 0.2693120740413512e+0, 0.4331561291720157e+0, 0.1080663250717391e-2),
        (5, 0.1419786452601918e+0, 0.6256167358580814e+0, 0.1126797131196295e-2),
        (5, 0.6709284600738255e-1, 0.3798395216859157e+0, 0.1022568715358061e-2),
        (5, 0.7057738183256172e-1, 0.5517505421423520e+0, 0.1108960267713108e-2),
        (5, 0.2783888477882155e+0, 0.6029619156159187e+0, 0.1122790653435766e-2),
        (5, 0.1979578938917407e+0, 0.3589606329589096e+0, 0.1032401847117460e-2),
        (5, 0.2087307061103274e+0, 0.5348666438135476e+0, 0.1107249382283854e-2),
        (5, 0.4055122137872836e+0, 0.5674997546074373e+0, 0.1121780048519972e-2),
    ),
    1202: (
        (0, 0, 0, 0.1105189233267572e-3),
        (1, 0, 0, 0.9205232738090741e-3),
        (2, 0, 0, 0.9133159786443561e-3),
        (3, 0.3712636449657089e-1, 0, 0.3690421898017899e-3),
        (3, 0.9140060412262223e-1, 0, 0.5603990928680660e-3),
        (3, 0.1531077852469906e+0, 0, 0.6865297629282609e-3),
        (3, 0.2180928891660612e+0, 0, 0.7720338551145630e-3),
        (3, 0.2839874532200175e+0, 0, 0.8301545958894795e-3),
        (3, 0.3491177600963764e+0, 0, 0.8686692550179628e-3),
        (3, 0.4121431461444309e+0, 0, 0.8927076285846890e-3),
        (3, 0.4718993627149127e+0, 0, 0.9060820238568219e-3),
        (3, 0.5273145452842337e+0, 0, 0.9119777254940867e-3),
        (3, 0.6209475332444019e+0, 0, 0.9128720138604181e-3),
        (3, 0.6569722711857291e+0, 0, 0.9130714935691735e-3),
        (3, 0.6841788309070143e+0, 0, 0.9152873784554116e-3),
        (3, 0.7012604330123631e+0, 0, 0.9187436274321654e-3),
        (4, 0.1072382215478166e+0, 0, 0.5176977312965694e-3),
        (4, 0.2582068959496968e+0, 0, 0.7331143682101417e-3),
        (4, 0.4172752955306717e+0, 0, 0.8463232836379928e-3),
        (4, 0.5700366911792503e+0, 0, 0.9031122694253992e-3),
        (5, 0.9827986018263947e+0, 0.1771774022615325e+0, 0.6485778453163257e-3),
        (5, 0.9624249230326228e+0, 0.2475716463426288e+0, 0.7435030910982369e-3),
        (5, 0.9402007994128811e+0, 0.3354616289066489e+0, 0.7998527891839054e-3),
        (5, 0.9320822040143202e+0, 0.3173615246611977e+0, 0.8101731497468018e-3),
        (5, 0.9043674199393299e+0, 0.4090268427085357e+0, 0.8483389574594331e-3),
        (5, 0.8912407560074747e+0, 0.3854291150669224e+0, 0.8556299257311812e-3),
        (5, 0.8676435628462708e+0, 0.4932221184851285e+0, 0.8803208679738260e-3),
        (5, 0.8581979986041619e+0, 0.4785320675922435e+0, 0.8811048182425720e-3),
        (5, 0.8396753624049856e+0, 0.4507422593157064e+0, 0.8850282341265444e-3),
        (5, 0.8165288564022188e+0, 0.5632123020762100e+0, 0.9021342299040653e-3),
        (5, 0.8015469370783529e+0, 0.5434303569693900e+0, 0.9010091677105086e-3),
        (5, 0.7773563069070351e+0, 0.5123518486419871e+0, 0.9022692938426915e-3),
        (5, 0.7661621213900394e+0, 0.6394279634749102e+0, 0.9158016174693465e-3),
        (5, 0.7553584143533510e+0, 0.6269805509024392e+0, 0.9131578003189435e-3),
        (5, 0.7344305757559503e+0, 0.6031161693096310e+0, 0.9107813579482705e-3),
        (5, 0.7043837184021765e+0, 0.5693702498468441e+0, 0.9105760258970126e-3),
    ),
    1454: (
        (0, 0, 0, 0.7777160743261247e-4),
        (2, 0, 0, 0.7557646413004701e-3),
        (3, 0.3229290663413854e-1, 0, 0.2841633806090617e-3),
        (3, 0.8036733271462222e-1, 0, 0.4374419127053555e-3),
        (3, 0.1354289960531653e+0, 0, 0.5417174740872172e-3),
        (3, 0.1938963861114426e+0, 0, 0.6148000891358593e-3),
        (3, 0.2537343715011275e+0, 0, 0.6664394485800705e-3),
        (3, 0.3135251434752570e+0, 0, 0.7025039356923220e-3),
        (3, 0.3721558339375338e+0, 0, 0.7268511789249627e-3),
        (3, 0.4286809575195696e+0, 0, 0.7422637534208629e-3),
        (3, 0.4822510128282994e+0, 0, 0.7509545035841214e-3),
        (3, 0.5320679333566263e+0, 0, 0.7548535057718401e-3),
        (3, 0.6172998195394274e+0, 0, 0.7554088969774001e-3),
        (3, 0.6510679849127481e+0, 0, 0.7553147174442808e-3),
        (3, 0.6777315251687360e+0, 0, 0.7564767653292297e-3),
        (3, 0.6963109410648741e+0, 0, 0.7587991808518730e-3),
        (3, 0.7058935009831749e+0, 0, 0.7608261832033027e-3),
        (4, 0.9955546194091857e+0, 0, 0.4021680447874916e-3),
        (4, 0.9734115901794209e+0, 0, 0.5804871793945964e-3),
        (4, 0.9275693732388626e+0, 0, 0.6792151955945159e-3),
        (4, 0.8568022422795103e+0, 0, 0.7336741211286294e-3),
        (4, 0.7623495553719372e+0, 0, 0.7581866300989608e-3),
        (5, 0.5707522908892223e+0, 0.4387028039889501e+0, 0.7538257859800743e-3),
        (5, 0.5196463388403083e+0, 0.3858908414762617e+0, 0.7483517247053123e-3),
        (5, 0.4646337531215351e+0, 0.3301937372343854e+0, 0.7371763661112059e-3),
        (5, 0.4063901697557691e+0, 0.2725423573563777e+0, 0.7183448895756934e-3),
        (5, 0.3456329466643087e+0, 0.2139510237495250e+0, 0.6895815529822191e-3),
        (5, 0.2831395121050332e+0, 0.1555922309786647e+0, 0.6480105801792886e-3),
        (5, 0.2197682022925330e+0, 0.9892878979686097e-1, 0.5897558896594636e-3),
        (5, 0.1564696098650355e+0, 0.4598642910675510e-1, 0.5095708849247346e-3),
        (5, 0.6027356673721295e+0, 0.3376625140173426e+0, 0.7536906428909755e-3),
        (5, 0.5496032320255096e+0, 0.2822301309727988e+0, 0.7472505965575118e-3),
        (5, 0.4921707755234567e+0, 0.2248632342592540e+0, 0.7343017132279698e-3),
        (5, 0.4309422998598483e+0, 0.1666224723456479e+0, 0.7130871582177445e-3),
        (5, 0.3664108182313672e+0, 0.1086964901822169e+0, 0.6817022032112776e-3),
        (5, 0.2990189057758436e+0, 0.5251989784120085e-1, 0.6380941145604121e-3),
        (5, 0.6268724013144998e+0, 0.2297523657550023e+0, 0.7550381377920310e-3),
        (5, 0.5707324144834607e+0, 0.1723080607093800e+0, 0.7478646640144802e-3),
        (5, 0.5096360901960365e+0, 0.1140238465390513e+0, 0.7335918720601220e-3),
        (5, 0.4438729938312456e+0, 0.5611522095882537e-1, 0.7110120527658118e-3),
        (5, 0.6419978471082389e+0, 0.1164174423140873e+0, 0.7571363978689501e-3),
        (5, 0.5817218061802611e+0, 0.5797589531445219e-1, 0.7489908329079234e-3),
    ),
}
